"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy kernel is the
fallback.  ``FIBERTRACK_BACKEND=python|compiled`` forces a choice at import
time, and callers may pass an explicit backend name per call.
"""

from __future__ import annotations

import os

from . import _extract_py

try:
    from . import _clipcore  # compiled extension, optional
except ImportError:  # pragma: no cover - depends on build environment
    _clipcore = None

_BACKENDS = {"python": _extract_py}
if _clipcore is not None:
    _BACKENDS["compiled"] = _clipcore


def available_backends() -> tuple[str, ...]:
    return tuple(sorted(_BACKENDS))


def get_backend(name: str | None = None):
    """Resolve a kernel module by name, env override, or availability."""
    if name is None:
        name = os.environ.get("FIBERTRACK_BACKEND")
    if name is None:
        name = "compiled" if "compiled" in _BACKENDS else "python"
    if name not in _BACKENDS:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(available_backends())}"
        )
    return _BACKENDS[name]


DEFAULT_BACKEND = get_backend().BACKEND_NAME
