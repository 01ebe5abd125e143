"""Quantized fiber-component extraction for piecewise-linear multifields.

For each range-space bin, the preimage inside every tetrahedron is a convex
fragment obtained by half-space clipping; fragments of the same bin merge when
their tets share a facet on which the bin's constraints stay feasible.  The
number of merged components and the total fragment volume per bin form the
fiber-component histogram of a frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import backend as _backend
from ._geom import EPS_GEOM, clip_polygon_by_box, clip_tet_by_box, simplices_volume
from .model import MultifieldFrame, Tetrahedron, field_range_box, mesh_connectivity
from .quantize import RangeQuantization

__all__ = [
    "FragmentCell",
    "FiberComponentHistogram",
    "clip_tet_by_bin",
    "facet_feasible",
    "extract_fiber_components",
]


@dataclass(frozen=True)
class FragmentCell:
    """Convex piece of one tet restricted to one range-space bin."""

    tet_id: int
    bin_index: tuple[int, ...]
    vertices: np.ndarray  # (m, 3 + r): positions then field values
    volume: float


@dataclass
class FiberComponentHistogram:
    """Per-bin fiber-component counts and slab measures over one spectrum."""

    quantization: RangeQuantization
    counts: np.ndarray  # int64, shape = quantization.shape
    measures: np.ndarray  # float64, same shape
    singular: np.ndarray  # bool, same shape (filled by the singular-bin pass)

    def __post_init__(self):
        shape = self.quantization.shape
        for name in ("counts", "measures", "singular"):
            arr = getattr(self, name)
            if arr.shape != shape:
                raise ValueError(f"{name} has shape {arr.shape}, spectrum is {shape}")
        if (self.counts < 0).any() or (self.measures < -1e-30).any():
            raise ValueError("negative bin content")

    @property
    def total_count(self) -> int:
        return int(self.counts.sum())

    @property
    def total_measure(self) -> float:
        return float(self.measures.sum())

    def occupied_bins(self) -> list[tuple[int, ...]]:
        return [tuple(int(i) for i in idx) for idx in np.argwhere(self.counts > 0)]

    def set_singular(self, flags: np.ndarray) -> None:
        if flags.shape != self.singular.shape:
            raise ValueError("singular flag shape mismatch")
        self.singular = flags.astype(bool)


def _dedupe_vertices(pieces) -> np.ndarray:
    verts = np.concatenate(pieces, axis=0)
    return np.unique(np.round(verts, 12), axis=0)


def clip_tet_by_bin(
    tet: Tetrahedron, bin_index, quant: RangeQuantization, eps: float = EPS_GEOM
) -> FragmentCell | None:
    """Exact closed clip of one tet by one bin's value box, or None if empty."""
    box = quant.bin_box(bin_index)
    verts = np.concatenate([tet.coords, tet.values], axis=1)
    constraints = [(3 + k, lo, hi) for k, (lo, hi) in enumerate(box)]
    pieces = clip_tet_by_box(verts, constraints, eps)
    if not pieces:
        return None
    return FragmentCell(
        tet_id=tet.index,
        bin_index=tuple(int(i) for i in bin_index),
        vertices=_dedupe_vertices(pieces),
        volume=simplices_volume(pieces),
    )


def facet_feasible(
    tri_values: np.ndarray, bin_index, quant: RangeQuantization, eps: float = EPS_GEOM
) -> bool:
    """True iff some point of the facet maps into the bin's closed value box.

    ``tri_values`` holds the per-field values at the facet's three vertices,
    shape (3, r).  The facet's image under the multifield is the convex hull
    of those tuples, so feasibility reduces to clipping that value-space
    triangle by the box.
    """
    tri = np.asarray(tri_values, dtype=np.float64)
    if tri.shape != (3, quant.n_fields):
        raise ValueError(f"expected (3, {quant.n_fields}) facet values, got {tri.shape}")
    box = quant.bin_box(bin_index)
    constraints = [(k, lo, hi) for k, (lo, hi) in enumerate(box)]
    return clip_polygon_by_box(tri, constraints, eps).shape[0] > 0


def extract_fiber_components(
    frame: MultifieldFrame,
    quant: RangeQuantization,
    backend: str | None = None,
    eps: float = EPS_GEOM,
) -> FiberComponentHistogram:
    """Extract the fiber-component histogram of one frame on a shared spectrum."""
    if quant.n_fields != frame.r:
        raise ValueError(f"quantization has {quant.n_fields} fields, frame has {frame.r}")
    if not quant.covers(field_range_box(frame)):
        raise ValueError("quantization does not cover the frame's value ranges")

    mesh = mesh_connectivity(frame.grid.dims)
    kernel = _backend.get_backend(backend)
    counts_flat, measures_flat = kernel.extract_frame(
        frame.grid.vertex_coords(),
        frame.values_matrix(),
        mesh.tets,
        mesh.interior_facet_tets,
        mesh.interior_facet_verts,
        [np.asarray(e) for e in quant.edges],
        eps,
    )
    shape = quant.shape
    return FiberComponentHistogram(
        quantization=quant,
        counts=np.asarray(counts_flat, dtype=np.int64).reshape(shape),
        measures=np.asarray(measures_flat, dtype=np.float64).reshape(shape),
        singular=np.zeros(shape, dtype=bool),
    )
