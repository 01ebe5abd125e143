"""Singular mesh-element detection via the gradient rank criterion.

A tetrahedron is singular when the piecewise-linear Jacobian of the fields
drops rank: the smallest singular value is at most tau times the largest.
Boundary triangles are tested the same way with the fields restricted to the
triangle plane, which captures degenerate fiber contacts with the domain
boundary.  A vanishing single-field gradient (relative to a characteristic
field scale) also marks an element singular, since critical points of any
component field are singular points of the multifield.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import MultifieldFrame, field_range_box, mesh_connectivity
from .quantize import RangeQuantization

__all__ = [
    "JacobiElementSet",
    "SingularBinSet",
    "mark_singular_elements",
    "project_singular_bins",
]

DEFAULT_TAU = 1e-6


@dataclass(frozen=True)
class JacobiElementSet:
    """Singular tets (interior test) and boundary triangles (restricted test)."""

    singular_tets: np.ndarray  # int64 tet indices
    singular_boundary_tris: np.ndarray  # int64 indices into the boundary facet list
    tau: float

    def __post_init__(self):
        if self.tau <= 0:
            raise ValueError("tau must be positive")


@dataclass(frozen=True)
class SingularBinSet:
    """Dense singular flags over a quantization's bin spectrum."""

    quantization: RangeQuantization
    flags: np.ndarray  # bool, shape = quantization.shape

    def __post_init__(self):
        if self.flags.shape != self.quantization.shape:
            raise ValueError("flag shape does not match the spectrum")

    def indices(self) -> set[tuple[int, ...]]:
        return {tuple(int(i) for i in idx) for idx in np.argwhere(self.flags)}

    def union(self, other: "SingularBinSet") -> "SingularBinSet":
        if self.flags.shape != other.flags.shape:
            raise ValueError("cannot union singular bins on different spectra")
        return SingularBinSet(self.quantization, self.flags | other.flags)


def _field_scales(frame: MultifieldFrame) -> np.ndarray:
    """Characteristic gradient magnitude per field: value spread over cell size."""
    ranges = field_range_box(frame)
    h = min(frame.grid.spacing)
    return np.array([(hi - lo) / h for lo, hi in ranges])


def mark_singular_elements(
    frame: MultifieldFrame, tau: float = DEFAULT_TAU
) -> JacobiElementSet:
    """Flag rank-deficient tets and boundary triangles of one frame."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    r = frame.r
    if r > 3:
        raise ValueError(f"unsupported field arity r={r}; the rank test needs r <= 3")

    mesh = mesh_connectivity(frame.grid.dims)
    coords = frame.grid.vertex_coords()
    values = frame.values_matrix()
    scales = _field_scales(frame)

    # interior: constant PL gradients from the edge system of each tet
    tets = mesh.tets
    p = coords[tets]
    v = values[tets]
    edge_mat = p[:, 1:] - p[:, :1]  # (T, 3, 3)
    dval = v[:, 1:] - v[:, :1]  # (T, 3, r)
    grads = np.linalg.solve(edge_mat, dval)  # (T, 3, r), column k = grad f_k
    jac = np.swapaxes(grads, 1, 2)  # (T, r, 3)

    norms = np.linalg.norm(grads, axis=1)  # (T, r)
    vanishing = (norms <= tau * scales[None, :]).any(axis=1)
    if min(r, 3) >= 2:
        svals = np.linalg.svd(jac, compute_uv=False)
        rank_deficient = svals[:, -1] <= tau * svals[:, 0]
        tet_singular = rank_deficient | vanishing
    else:
        tet_singular = vanishing

    # boundary: fields restricted to the triangle plane, orthonormal 2-D basis
    tris = mesh.boundary_facet_verts
    tp = coords[tris]
    tv = values[tris]
    e1 = tp[:, 1] - tp[:, 0]
    e2 = tp[:, 2] - tp[:, 0]
    l1 = np.linalg.norm(e1, axis=1)
    u = e1 / l1[:, None]
    e2u = np.einsum("ij,ij->i", e2, u)
    w = e2 - e2u[:, None] * u
    lw = np.linalg.norm(w, axis=1)
    w = w / lw[:, None]
    d1 = tv[:, 1] - tv[:, 0]  # (B, r)
    d2 = tv[:, 2] - tv[:, 0]
    gu = d1 / l1[:, None]
    gv = (d2 - e2u[:, None] * gu) / lw[:, None]
    jac2 = np.stack([gu, gv], axis=2)  # (B, r, 2)

    norms2 = np.linalg.norm(jac2, axis=2)
    vanishing2 = (norms2 <= tau * scales[None, :]).any(axis=1)
    if min(r, 2) >= 2:
        svals2 = np.linalg.svd(jac2, compute_uv=False)
        rank_deficient2 = svals2[:, -1] <= tau * svals2[:, 0]
        tri_singular = rank_deficient2 | vanishing2
    else:
        tri_singular = vanishing2

    return JacobiElementSet(
        singular_tets=np.flatnonzero(tet_singular).astype(np.int64),
        singular_boundary_tris=np.flatnonzero(tri_singular).astype(np.int64),
        tau=float(tau),
    )


def _mark_range(flags: np.ndarray, quant: RangeQuantization, vmin: np.ndarray, vmax: np.ndarray):
    """Set flags for all bins whose closed box intersects [vmin, vmax] per field."""
    sl = []
    for k in range(quant.n_fields):
        e = quant.edges[k]
        m = e.shape[0] - 1
        lo = max(0, int(np.searchsorted(e, vmin[k], side="left")) - 1)
        hi = min(m - 1, int(np.searchsorted(e, vmax[k], side="right")) - 1)
        if hi < lo:
            return
        sl.append(slice(lo, hi + 1))
    flags[tuple(sl)] = True


def project_singular_bins(
    jset: JacobiElementSet, frame: MultifieldFrame, quant: RangeQuantization
) -> SingularBinSet:
    """Flag every bin whose box meets the value range of a singular element."""
    if quant.n_fields != frame.r:
        raise ValueError("quantization field count does not match the frame")
    if not quant.covers(field_range_box(frame)):
        raise ValueError("quantization does not cover the frame's value ranges")

    mesh = mesh_connectivity(frame.grid.dims)
    values = frame.values_matrix()
    flags = np.zeros(quant.shape, dtype=bool)

    if jset.singular_tets.size:
        tv = values[mesh.tets[jset.singular_tets]]  # (S, 4, r)
        vmin = tv.min(axis=1)
        vmax = tv.max(axis=1)
        for i in range(vmin.shape[0]):
            _mark_range(flags, quant, vmin[i], vmax[i])
    if jset.singular_boundary_tris.size:
        tv = values[mesh.boundary_facet_verts[jset.singular_boundary_tris]]
        vmin = tv.min(axis=1)
        vmax = tv.max(axis=1)
        for i in range(vmin.shape[0]):
            _mark_range(flags, quant, vmin[i], vmax[i])
    return SingularBinSet(quantization=quant, flags=flags)
