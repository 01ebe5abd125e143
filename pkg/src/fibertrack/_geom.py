"""Exact piecewise-linear clipping primitives.

A clip vertex is a vector (x, y, z, f_1, ..., f_r): world position followed by
field values.  Every field is affine on a tetrahedron, so a bin constraint
lo <= f_k <= hi is a pair of half-spaces, and edge interpolation updates
position and all field values with the same parameter.

Tetrahedra are clipped by decomposition: cutting a simplex with one plane
yields the empty set, the simplex, a corner tet, or a wedge, and wedges split
into three tets.  The pieces tile the clipped region, so summed determinant
volumes are exact up to roundoff.

Constraints are evaluated closed with tolerance EPS_GEOM: vertices within the
tolerance of a plane count as inside, which keeps zero-volume (flat) fragments
alive instead of dropping them.
"""

from __future__ import annotations

import numpy as np

EPS_GEOM = 1e-12

# staircase split of a wedge with corners (t0, t1, t2 | b0, b1, b2),
# ti and bi matched across the three quad faces
_WEDGE_TETS = ((0, 1, 2, 3), (1, 2, 3, 4), (2, 3, 4, 5))


def _lerp(a: np.ndarray, b: np.ndarray, ga: float, gb: float) -> np.ndarray:
    t = ga / (ga - gb)
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    return a + t * (b - a)


def clip_simplices_halfplane(pieces, col: int, bound: float, sign: float, eps: float = EPS_GEOM):
    """Clip tet pieces to the region sign * (v[col] - bound) <= 0 (closed).

    ``pieces`` is a list of (4, d) arrays; returns a new list.
    """
    out = []
    for tet in pieces:
        g = sign * (tet[:, col] - bound)
        inside = g <= eps
        n_in = int(inside.sum())
        if n_in == 4:
            out.append(tet)
            continue
        if n_in == 0:
            continue
        ins = np.flatnonzero(inside)
        outs = np.flatnonzero(~inside)
        if n_in == 1:
            a = ins[0]
            verts = [tet[a]] + [_lerp(tet[a], tet[o], g[a], g[o]) for o in outs]
            out.append(np.stack(verts))
        elif n_in == 2:
            a, b = ins
            c, d = outs
            corners = np.stack(
                [
                    tet[a],
                    _lerp(tet[a], tet[c], g[a], g[c]),
                    _lerp(tet[a], tet[d], g[a], g[d]),
                    tet[b],
                    _lerp(tet[b], tet[c], g[b], g[c]),
                    _lerp(tet[b], tet[d], g[b], g[d]),
                ]
            )
            for quad in _WEDGE_TETS:
                out.append(corners[list(quad)])
        else:  # n_in == 3
            a, b, c = ins
            d = outs[0]
            corners = np.stack(
                [
                    tet[a],
                    tet[b],
                    tet[c],
                    _lerp(tet[a], tet[d], g[a], g[d]),
                    _lerp(tet[b], tet[d], g[b], g[d]),
                    _lerp(tet[c], tet[d], g[c], g[d]),
                ]
            )
            for quad in _WEDGE_TETS:
                out.append(corners[list(quad)])
    return out


def clip_tet_by_box(verts: np.ndarray, constraints, eps: float = EPS_GEOM):
    """Clip one tet by closed per-column interval constraints.

    ``verts`` is (4, d); ``constraints`` is a sequence of (col, lo, hi).
    Returns the list of surviving tet pieces (possibly degenerate).
    """
    pieces = [np.asarray(verts, dtype=np.float64)]
    for col, lo, hi in constraints:
        pieces = clip_simplices_halfplane(pieces, col, lo, -1.0, eps)
        if not pieces:
            return []
        pieces = clip_simplices_halfplane(pieces, col, hi, 1.0, eps)
        if not pieces:
            return []
    return pieces


def simplices_volume(pieces) -> float:
    """Total unsigned volume of tet pieces, using the first 3 columns."""
    total = 0.0
    for tet in pieces:
        e = tet[1:, :3] - tet[0, :3]
        total += abs(float(np.linalg.det(e))) / 6.0
    return total


def clip_polygon_by_box(points: np.ndarray, constraints, eps: float = EPS_GEOM) -> np.ndarray:
    """Sutherland-Hodgman clip of a convex polygon by closed interval constraints.

    ``points`` is (m, d) in traversal order; degenerate outputs (segment or
    point) are valid non-empty results.  Returns an (m', d) array, m' >= 0.
    """
    pts = [np.asarray(p, dtype=np.float64) for p in points]
    for col, lo, hi in constraints:
        for bound, sign in ((lo, -1.0), (hi, 1.0)):
            if not pts:
                return np.empty((0, points.shape[1]))
            nxt = []
            n = len(pts)
            for i in range(n):
                a = pts[i - 1]
                b = pts[i]
                ga = sign * (a[col] - bound)
                gb = sign * (b[col] - bound)
                a_in = ga <= eps
                b_in = gb <= eps
                if a_in != b_in:
                    nxt.append(_lerp(a, b, ga, gb))
                if b_in:
                    nxt.append(b)
            pts = nxt
    if not pts:
        return np.empty((0, points.shape[1]))
    return np.stack(pts)
