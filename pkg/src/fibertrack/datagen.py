"""Deterministic generators for synthetic time-varying multifield series.

Two families:

* ``translated-paraboloid``: a height field and a paraboloid sampled on a
  cubic box that slides along the space diagonal site by site.  The midpoint
  site has a box symmetric about the origin, where fiber circles graze
  opposite box walls simultaneously; that is the known topological event.

* ``separating-blobs``: a two-Gaussian bump field (plus a height field) whose
  centers move apart linearly until the mid-level superlevel set splits in
  two.  The first split site is computed by an independent vertex flood fill
  and returned as ground truth in the series metadata.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .model import FrameSeries, GridDomain, MultifieldFrame, ScalarField

__all__ = [
    "SyntheticSpec",
    "gen_translated_paraboloid",
    "gen_separating_blobs",
    "generate",
    "superlevel_component_count",
    "BLOB_SPLIT_LEVEL",
]

PARABOLOID_BOX_LO = -5.5
PARABOLOID_BOX_HI = 4.5
BLOB_SPLIT_LEVEL = 0.5


@dataclass(frozen=True)
class SyntheticSpec:
    """Parameters for one synthetic series."""

    kind: str = "translated-paraboloid"
    dims: tuple[int, int, int] = (20, 20, 20)
    step: float = 0.05
    n_sites: int = 21
    # separating-blobs parameters; the default trajectory brackets the split
    # of the mid-level superlevel set inside the series
    sigma: float = 1.0
    center1_start: tuple[float, float, float] = (-1.05, 0.0, 0.0)
    center1_end: tuple[float, float, float] = (-1.3, 0.0, 0.0)
    center2_start: tuple[float, float, float] = (1.05, 0.0, 0.0)
    center2_end: tuple[float, float, float] = (1.3, 0.0, 0.0)
    box: tuple[float, float] = (-4.0, 4.0)

    def __post_init__(self):
        if self.kind not in ("translated-paraboloid", "separating-blobs"):
            raise ValueError(f"unknown synthetic kind {self.kind!r}")
        if self.n_sites < 2:
            raise ValueError("n_sites must be >= 2")
        if self.step <= 0:
            raise ValueError("step must be > 0")
        if self.sigma <= 0:
            raise ValueError("sigma must be > 0")


def _axis_coords(grid: GridDomain):
    xs = grid.origin[0] + grid.spacing[0] * np.arange(grid.dims[0])
    ys = grid.origin[1] + grid.spacing[1] * np.arange(grid.dims[1])
    zs = grid.origin[2] + grid.spacing[2] * np.arange(grid.dims[2])
    # broadcastable to (nz, ny, nx), flattening x-fastest
    return xs[None, None, :], ys[None, :, None], zs[:, None, None]


def gen_translated_paraboloid(spec: SyntheticSpec) -> FrameSeries:
    """Height and paraboloid fields on a box sliding along the diagonal."""
    if spec.kind != "translated-paraboloid":
        raise ValueError("spec.kind must be 'translated-paraboloid'")
    nx, ny, nz = spec.dims
    side = PARABOLOID_BOX_HI - PARABOLOID_BOX_LO
    spacing = (side / (nx - 1), side / (ny - 1), side / (nz - 1))
    frames = []
    for k in range(spec.n_sites):
        o = PARABOLOID_BOX_LO + k * spec.step
        grid = GridDomain(dims=spec.dims, origin=(o, o, o), spacing=spacing)
        x, y, z = _axis_coords(grid)
        height = np.broadcast_to(z, (nz, ny, nx)).reshape(-1)
        parab = (x * x + y * y - z).reshape(-1)
        frames.append(
            MultifieldFrame(
                grid=grid,
                fields=(
                    ScalarField("height", height.copy()),
                    ScalarField("paraboloid", parab),
                ),
                time_index=k,
            )
        )
    meta = {"kind": spec.kind, "step": spec.step, "symmetric_site": (spec.n_sites - 1) // 2}
    return FrameSeries(frames=tuple(frames), site_labels=tuple(range(spec.n_sites)), metadata=meta)


def superlevel_component_count(values: np.ndarray, dims, level: float) -> int:
    """Count face-connected components of {values >= level} on vertex samples.

    Plain breadth-first flood fill over the 6-neighbourhood; independent of
    the clipping pipeline so it can serve as a ground-truth oracle.
    """
    nx, ny, nz = dims
    mask = (np.asarray(values).reshape(nz, ny, nx) >= level)
    seen = np.zeros_like(mask)
    count = 0
    for start in zip(*np.nonzero(mask & ~seen)):
        if seen[start]:
            continue
        count += 1
        queue = deque([start])
        seen[start] = True
        while queue:
            cz, cy, cx = queue.popleft()
            for dz, dy, dx in (
                (1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1),
            ):
                nz_, ny_, nx_ = cz + dz, cy + dy, cx + dx
                if 0 <= nz_ < nz and 0 <= ny_ < ny and 0 <= nx_ < nx:
                    if mask[nz_, ny_, nx_] and not seen[nz_, ny_, nx_]:
                        seen[nz_, ny_, nx_] = True
                        queue.append((nz_, ny_, nx_))
    return count


def gen_separating_blobs(spec: SyntheticSpec) -> FrameSeries:
    """Two-Gaussian bump field splitting apart over a fixed box, plus height."""
    if spec.kind != "separating-blobs":
        raise ValueError("spec.kind must be 'separating-blobs'")
    nx, ny, nz = spec.dims
    lo, hi = spec.box
    if hi <= lo:
        raise ValueError("box upper bound must exceed lower bound")
    spacing = ((hi - lo) / (nx - 1), (hi - lo) / (ny - 1), (hi - lo) / (nz - 1))
    c1s = np.array(spec.center1_start)
    c1e = np.array(spec.center1_end)
    c2s = np.array(spec.center2_start)
    c2e = np.array(spec.center2_end)

    coincident = True
    for k in range(spec.n_sites):
        t = k / (spec.n_sites - 1)
        if not np.array_equal(c1s + t * (c1e - c1s), c2s + t * (c2e - c2s)):
            coincident = False
            break
    if coincident:
        raise ValueError("blob centers are identical at every site; no split event")

    frames = []
    split_site = None
    for k in range(spec.n_sites):
        t = k / (spec.n_sites - 1)
        c1 = c1s + t * (c1e - c1s)
        c2 = c2s + t * (c2e - c2s)
        grid = GridDomain(dims=spec.dims, origin=(lo, lo, lo), spacing=spacing)
        x, y, z = _axis_coords(grid)
        s2 = spec.sigma**2
        bumps = np.exp(
            -((x - c1[0]) ** 2 + (y - c1[1]) ** 2 + (z - c1[2]) ** 2) / s2
        ) + np.exp(-((x - c2[0]) ** 2 + (y - c2[1]) ** 2 + (z - c2[2]) ** 2) / s2)
        bumps = bumps.reshape(-1)
        height = np.broadcast_to(z, (nz, ny, nx)).reshape(-1)
        frames.append(
            MultifieldFrame(
                grid=grid,
                fields=(
                    ScalarField("blobs", bumps),
                    ScalarField("height", height.copy()),
                ),
                time_index=k,
            )
        )
        if split_site is None:
            n_comp = superlevel_component_count(bumps, spec.dims, BLOB_SPLIT_LEVEL)
            if n_comp >= 2:
                split_site = k
    if split_site is None:
        raise ValueError(
            "blob series never splits at the ground-truth level; widen the center travel"
        )
    meta = {
        "kind": spec.kind,
        "split_site": split_site,
        "split_level": BLOB_SPLIT_LEVEL,
        "sigma": spec.sigma,
    }
    return FrameSeries(frames=tuple(frames), site_labels=tuple(range(spec.n_sites)), metadata=meta)


def generate(spec: SyntheticSpec) -> FrameSeries:
    if spec.kind == "translated-paraboloid":
        return gen_translated_paraboloid(spec)
    return gen_separating_blobs(spec)
