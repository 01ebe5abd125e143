"""Quantization of the multifield range space into a shared bin spectrum.

One quantization is built for a whole series: per-field uniform bin edges that
cover the union of every frame's value range, anchored at the global minimum.
Bins are half-open [lo, hi) with the final bin closed.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import FrameSeries, MultifieldFrame, field_range_box

__all__ = ["RangeQuantization", "build_quantization", "series_range_union"]

NOMINAL_DEGENERATE_WIDTH = 1.0


@dataclass(frozen=True)
class RangeQuantization:
    """Per-field strictly increasing bin edges over the discrete range spectrum."""

    edges: tuple[np.ndarray, ...]

    def __post_init__(self):
        frozen = []
        for k, e in enumerate(self.edges):
            e = np.ascontiguousarray(e, dtype=np.float64)
            if e.ndim != 1 or e.shape[0] < 2:
                raise ValueError(f"field {k}: need at least 2 edges for 1 bin")
            if not np.all(np.diff(e) > 0):
                raise ValueError(f"field {k}: edges must be strictly increasing")
            e.flags.writeable = False
            frozen.append(e)
        object.__setattr__(self, "edges", tuple(frozen))

    @property
    def n_fields(self) -> int:
        return len(self.edges)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(e.shape[0] - 1 for e in self.edges)

    @property
    def n_bins(self) -> int:
        return int(np.prod(self.shape))

    def widths(self) -> tuple[float, ...]:
        """Representative (first) bin width per field."""
        return tuple(float(e[1] - e[0]) for e in self.edges)

    def bin_box(self, index) -> list[tuple[float, float]]:
        """Closed value box [lo, hi] per field for one bin index tuple."""
        if len(index) != self.n_fields:
            raise ValueError(f"bin index arity {len(index)} != {self.n_fields} fields")
        box = []
        for k, i in enumerate(index):
            e = self.edges[k]
            i = int(i)
            if not 0 <= i < e.shape[0] - 1:
                raise IndexError(f"field {k}: bin {i} out of range [0, {e.shape[0] - 1})")
            box.append((float(e[i]), float(e[i + 1])))
        return box

    def locate(self, values) -> tuple[int, ...]:
        """Bin index of a value tuple under half-open binning, last bin closed."""
        idx = []
        for k, v in enumerate(values):
            e = self.edges[k]
            if v < e[0] or v > e[-1]:
                raise ValueError(f"field {k}: value {v} outside spectrum [{e[0]}, {e[-1]}]")
            i = int(np.searchsorted(e, v, side="right")) - 1
            idx.append(min(i, e.shape[0] - 2))
        return tuple(idx)

    def covers(self, ranges) -> bool:
        """True if every (min, max) pair fits inside the per-field spectrum."""
        return all(
            self.edges[k][0] <= lo and hi <= self.edges[k][-1]
            for k, (lo, hi) in enumerate(ranges)
        )

    def ravel_index(self, index) -> int:
        flat = 0
        for i, m in zip(index, self.shape):
            flat = flat * m + int(i)
        return flat

    def unravel_index(self, flat: int) -> tuple[int, ...]:
        return tuple(int(i) for i in np.unravel_index(flat, self.shape))


def series_range_union(series: FrameSeries) -> list[tuple[float, float]]:
    """Per-field union of value ranges over all frames."""
    ranges = None
    for frame in series.frames:
        box = field_range_box(frame)
        if ranges is None:
            ranges = box
        else:
            ranges = [(min(a, c), max(b, d)) for (a, b), (c, d) in zip(ranges, box)]
    return ranges


def build_quantization(
    series: FrameSeries | MultifieldFrame,
    slab_widths=None,
    bin_counts=None,
) -> RangeQuantization:
    """Uniform per-field edges covering the whole series, anchored at the minimum.

    Exactly one of ``slab_widths`` (bin width per field) or ``bin_counts``
    (bin count per field) must be given.  A degenerate field (min == max)
    yields a single bin of nominal width, with a warning.
    """
    if (slab_widths is None) == (bin_counts is None):
        raise ValueError("give exactly one of slab_widths or bin_counts")
    if isinstance(series, MultifieldFrame):
        ranges = field_range_box(series)
        r = series.r
    else:
        ranges = series_range_union(series)
        r = series.r

    params = slab_widths if slab_widths is not None else bin_counts
    if np.isscalar(params):
        params = [params] * r
    params = list(params)
    if len(params) != r:
        raise ValueError(f"got {len(params)} per-field parameters for {r} fields")

    edges = []
    for k, (lo, hi) in enumerate(ranges):
        if slab_widths is not None:
            w = float(params[k])
            if w <= 0:
                raise ValueError(f"field {k}: slab width must be > 0, got {w}")
            if hi == lo:
                warnings.warn(
                    f"field {k} is degenerate (min == max == {lo}); using one bin "
                    f"of width {w}"
                )
                e = np.array([lo, lo + w])
            else:
                m = max(1, math.ceil((hi - lo) / w - 1e-12))
                e = lo + w * np.arange(m + 1)
                while e[-1] < hi:
                    m += 1
                    e = lo + w * np.arange(m + 1)
        else:
            m = int(params[k])
            if m < 1:
                raise ValueError(f"field {k}: bin count must be >= 1, got {m}")
            if hi == lo:
                warnings.warn(
                    f"field {k} is degenerate (min == max == {lo}); using one bin "
                    f"of nominal width {NOMINAL_DEGENERATE_WIDTH}"
                )
                e = np.array([lo, lo + NOMINAL_DEGENERATE_WIDTH])
            else:
                e = np.linspace(lo, hi, m + 1)
        edges.append(e)
    return RangeQuantization(edges=tuple(edges))
