"""Grid, field, and frame data model with Kuhn/Freudenthal tetrahedral meshing.

All sampled data lives on regular 3-D grids in x-fastest vertex order.  Every
cubic cell is split into the same six tetrahedra around the main diagonal, so
neighbouring cells agree on the triangulation of their shared face.  That
consistency is what makes fragment adjacency across cell borders exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

__all__ = [
    "GridDomain",
    "ScalarField",
    "MultifieldFrame",
    "FrameSeries",
    "Tetrahedron",
    "MeshConnectivity",
    "grid_tetrahedra",
    "mesh_connectivity",
    "tetrahedralize",
    "tet_volumes",
    "field_range_box",
]


@dataclass(frozen=True)
class GridDomain:
    """Regular vertex grid: ``dims`` vertex counts, world ``origin``/``spacing``."""

    dims: tuple[int, int, int]
    origin: tuple[float, float, float]
    spacing: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "origin", tuple(float(o) for o in self.origin))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))
        if len(self.dims) != 3 or len(self.origin) != 3 or len(self.spacing) != 3:
            raise ValueError("grid needs 3-component dims, origin and spacing")
        if any(d < 2 for d in self.dims):
            raise ValueError(f"grid dims must all be >= 2, got {self.dims}")
        if any(s <= 0 for s in self.spacing):
            raise ValueError(f"grid spacing must be positive, got {self.spacing}")

    @property
    def n_vertices(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.dims
        return (nx - 1) * (ny - 1) * (nz - 1)

    @property
    def domain_volume(self) -> float:
        nx, ny, nz = self.dims
        dx, dy, dz = self.spacing
        return (nx - 1) * dx * (ny - 1) * dy * (nz - 1) * dz

    def vertex_coords(self) -> np.ndarray:
        """World coordinates of every vertex, shape (n_vertices, 3), x-fastest."""
        nx, ny, nz = self.dims
        xs = self.origin[0] + self.spacing[0] * np.arange(nx)
        ys = self.origin[1] + self.spacing[1] * np.arange(ny)
        zs = self.origin[2] + self.spacing[2] * np.arange(nz)
        coords = np.empty((nz, ny, nx, 3), dtype=np.float64)
        coords[..., 0] = xs[None, None, :]
        coords[..., 1] = ys[None, :, None]
        coords[..., 2] = zs[:, None, None]
        return coords.reshape(-1, 3)


@dataclass(frozen=True)
class ScalarField:
    """Named vertex-sampled scalar field, values in x-fastest order."""

    name: str
    values: np.ndarray

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise ValueError(f"field {self.name!r}: values must be a 1-D array")
        if not np.all(np.isfinite(values)):
            raise ValueError(f"field {self.name!r} contains non-finite values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class MultifieldFrame:
    """One time step: r scalar fields sampled on a shared grid."""

    grid: GridDomain
    fields: tuple[ScalarField, ...]
    time_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "fields", tuple(self.fields))
        if len(self.fields) < 1:
            raise ValueError("frame needs at least one field")
        names = [f.name for f in self.fields]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate field names: {names}")
        for f in self.fields:
            if f.values.shape[0] != self.grid.n_vertices:
                raise ValueError(
                    f"field {f.name!r} has {f.values.shape[0]} values, "
                    f"grid has {self.grid.n_vertices} vertices"
                )

    @property
    def r(self) -> int:
        return len(self.fields)

    @property
    def field_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.fields)

    def values_matrix(self) -> np.ndarray:
        """Per-vertex field tuples, shape (n_vertices, r)."""
        return np.stack([f.values for f in self.fields], axis=1)

    def select_fields(self, names) -> "MultifieldFrame":
        by_name = {f.name: f for f in self.fields}
        missing = [n for n in names if n not in by_name]
        if missing:
            raise KeyError(f"unknown fields {missing}; frame has {list(by_name)}")
        return MultifieldFrame(self.grid, tuple(by_name[n] for n in names), self.time_index)


@dataclass(frozen=True)
class FrameSeries:
    """Ordered time series of frames sharing field layout, dims and spacing."""

    frames: tuple[MultifieldFrame, ...]
    site_labels: tuple[int, ...] | None = None
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "frames", tuple(self.frames))
        if len(self.frames) < 2:
            raise ValueError("series needs >= 2 frames")
        first = self.frames[0]
        for fr in self.frames[1:]:
            if fr.field_names != first.field_names:
                raise ValueError(
                    f"field mismatch across frames: {fr.field_names} vs {first.field_names}"
                )
            if fr.grid.dims != first.grid.dims or fr.grid.spacing != first.grid.spacing:
                raise ValueError("all frames must share grid dims and spacing")
        if self.site_labels is not None:
            labels = tuple(int(s) for s in self.site_labels)
            if len(labels) != len(self.frames):
                raise ValueError("site_labels length must match frame count")
            object.__setattr__(self, "site_labels", labels)

    @property
    def r(self) -> int:
        return self.frames[0].r

    @property
    def field_names(self) -> tuple[str, ...]:
        return self.frames[0].field_names

    def labels(self) -> tuple[int, ...]:
        if self.site_labels is not None:
            return self.site_labels
        return tuple(range(len(self.frames)))

    def select_fields(self, names) -> "FrameSeries":
        return FrameSeries(
            tuple(fr.select_fields(names) for fr in self.frames),
            self.site_labels,
            dict(self.metadata),
        )


@dataclass(frozen=True)
class Tetrahedron:
    """One mesh tetrahedron with world coordinates and per-field vertex values."""

    index: int
    vertex_ids: np.ndarray  # (4,) global grid vertex ids
    coords: np.ndarray  # (4, 3) world coordinates
    values: np.ndarray  # (4, r) per-field values

    @property
    def volume(self) -> float:
        e = self.coords[1:] - self.coords[0]
        return abs(float(np.linalg.det(e))) / 6.0


# The six Kuhn tetrahedra of the unit cell, each walking from (0,0,0) to
# (1,1,1) along one axis permutation.  Vertex order is fixed so the signed
# volume is positive.
def _unit_cell_patterns() -> np.ndarray:
    patterns = []
    for perm in itertools.permutations((0, 1, 2)):
        v0 = np.zeros(3, dtype=np.int64)
        v1 = v0.copy()
        v1[perm[0]] = 1
        v2 = v1.copy()
        v2[perm[1]] = 1
        v3 = np.ones(3, dtype=np.int64)
        tet = np.stack([v0, v1, v2, v3])
        if np.linalg.det((tet[1:] - tet[0]).astype(float)) < 0:
            tet = tet[[0, 2, 1, 3]]
        patterns.append(tet)
    return np.stack(patterns)  # (6, 4, 3)


_CELL_PATTERNS = _unit_cell_patterns()


@lru_cache(maxsize=8)
def grid_tetrahedra(dims: tuple[int, int, int]) -> np.ndarray:
    """Tetrahedron vertex ids for a grid, shape (6 * n_cells, 4), cell-major."""
    nx, ny, nz = dims
    cx, cy, cz = np.meshgrid(
        np.arange(nx - 1), np.arange(ny - 1), np.arange(nz - 1), indexing="ij"
    )
    # cell order: x-fastest to match vertex indexing convention
    cx = cx.reshape(-1, order="F")
    cy = cy.reshape(-1, order="F")
    cz = cz.reshape(-1, order="F")
    n_cells = cx.shape[0]
    tets = np.empty((n_cells, 6, 4), dtype=np.int32)
    for p in range(6):
        for v in range(4):
            ox, oy, oz = _CELL_PATTERNS[p, v]
            tets[:, p, v] = (cx + ox) + nx * ((cy + oy) + ny * (cz + oz))
    tets = tets.reshape(-1, 4)
    tets.flags.writeable = False
    return tets


@dataclass(frozen=True)
class MeshConnectivity:
    """Facet adjacency of the tetrahedral mesh for one grid size."""

    tets: np.ndarray  # (T, 4) vertex ids
    interior_facet_tets: np.ndarray  # (F, 2) tet ids sharing the facet
    interior_facet_verts: np.ndarray  # (F, 3) sorted vertex ids
    boundary_facet_tets: np.ndarray  # (B,) owning tet id
    boundary_facet_verts: np.ndarray  # (B, 3) sorted vertex ids


@lru_cache(maxsize=8)
def mesh_connectivity(dims: tuple[int, int, int]) -> MeshConnectivity:
    tets = grid_tetrahedra(dims)
    n_tets = tets.shape[0]
    # four triangular faces per tet, rows sorted so shared facets compare equal
    face_local = np.array([[1, 2, 3], [0, 2, 3], [0, 1, 3], [0, 1, 2]])
    faces = tets[:, face_local].reshape(-1, 3)
    faces = np.sort(faces, axis=1)
    owner = np.repeat(np.arange(n_tets, dtype=np.int32), 4)

    order = np.lexsort((faces[:, 2], faces[:, 1], faces[:, 0]))
    faces = faces[order]
    owner = owner[order]
    same = np.all(faces[1:] == faces[:-1], axis=1)
    # a facet appears in exactly 1 (boundary) or 2 (interior) tets
    pair_start = np.flatnonzero(same)
    is_pair_member = np.zeros(faces.shape[0], dtype=bool)
    is_pair_member[pair_start] = True
    is_pair_member[pair_start + 1] = True

    interior_tets = np.stack([owner[pair_start], owner[pair_start + 1]], axis=1)
    interior_verts = faces[pair_start]
    boundary_mask = ~is_pair_member
    return MeshConnectivity(
        tets=tets,
        interior_facet_tets=np.ascontiguousarray(interior_tets, dtype=np.int32),
        interior_facet_verts=np.ascontiguousarray(interior_verts, dtype=np.int32),
        boundary_facet_tets=np.ascontiguousarray(owner[boundary_mask], dtype=np.int32),
        boundary_facet_verts=np.ascontiguousarray(faces[boundary_mask], dtype=np.int32),
    )


def tet_volumes(coords: np.ndarray, tets: np.ndarray) -> np.ndarray:
    """Unsigned volumes for every tet, vectorized."""
    p = coords[tets]
    e = p[:, 1:] - p[:, :1]
    return np.abs(np.linalg.det(e)) / 6.0


def tetrahedralize(frame: MultifieldFrame) -> list[Tetrahedron]:
    """Split every grid cell into 6 tetrahedra with a fixed main diagonal."""
    tets = grid_tetrahedra(frame.grid.dims)
    coords = frame.grid.vertex_coords()
    values = frame.values_matrix()
    return [
        Tetrahedron(index=i, vertex_ids=tets[i], coords=coords[tets[i]], values=values[tets[i]])
        for i in range(tets.shape[0])
    ]


def field_range_box(frame: MultifieldFrame) -> list[tuple[float, float]]:
    """Exact per-field (min, max) over the frame's vertex samples."""
    return [(float(f.values.min()), float(f.values.max())) for f in frame.fields]
