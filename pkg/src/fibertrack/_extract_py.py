"""Numpy fallback kernel for per-frame fiber-component extraction.

Mirrors the compiled extension in ``_clipcore``: same fragment semantics, same
counting convention, interchangeable results.  Candidate (tet, bin) pairs are
clipped as one batched simplex soup; facet adjacency candidates are found by a
global sort over (facet, bin) incidences.

Counting convention: constraints are closed with tolerance ``eps``; a fragment
whose values for some field lie entirely on the bin's lower edge belongs to
the bin below and is rejected here (it is produced by that bin's closed upper
constraint instead).
"""

from __future__ import annotations

import numpy as np

from ._geom import _WEDGE_TETS

BACKEND_NAME = "python"

_POW2 = np.array([1, 2, 4, 8], dtype=np.int64)
_CODE_TABLE = [
    (
        tuple(i for i in range(4) if c >> i & 1),
        tuple(i for i in range(4) if not c >> i & 1),
    )
    for c in range(16)
]


def _clip_batch(simp, cand, col, bounds, sign, eps):
    """Clip a simplex soup against per-candidate planes sign*(v[col]-b) <= 0."""
    if simp.shape[0] == 0:
        return simp, cand
    g = sign * (simp[:, :, col] - bounds[cand][:, None])
    inside = g <= eps
    code = inside @ _POW2
    out_s = []
    out_c = []
    keep = code == 15
    if keep.any():
        out_s.append(simp[keep])
        out_c.append(cand[keep])
    for c in range(1, 15):
        rows = np.flatnonzero(code == c)
        if rows.size == 0:
            continue
        X = simp[rows]
        G = g[rows]
        C = cand[rows]
        ins, outs = _CODE_TABLE[c]

        def interp(i, j):
            t = G[:, i] / (G[:, i] - G[:, j])
            np.clip(t, 0.0, 1.0, out=t)
            return X[:, i] + t[:, None] * (X[:, j] - X[:, i])

        if len(ins) == 1:
            a = ins[0]
            pieces = np.stack(
                [X[:, a], interp(a, outs[0]), interp(a, outs[1]), interp(a, outs[2])],
                axis=1,
            )
            out_s.append(pieces)
            out_c.append(C)
        elif len(ins) == 2:
            a, b = ins
            p, q = outs
            corners = np.stack(
                [X[:, a], interp(a, p), interp(a, q), X[:, b], interp(b, p), interp(b, q)],
                axis=1,
            )
            for tet in _WEDGE_TETS:
                out_s.append(corners[:, tet])
                out_c.append(C)
        else:  # 3 inside
            a, b, c3 = ins
            d = outs[0]
            corners = np.stack(
                [X[:, a], X[:, b], X[:, c3], interp(a, d), interp(b, d), interp(c3, d)],
                axis=1,
            )
            for tet in _WEDGE_TETS:
                out_s.append(corners[:, tet])
                out_c.append(C)
    if not out_s:
        return simp[:0], cand[:0]
    return np.concatenate(out_s), np.concatenate(out_c)


def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def _polygon_clip_pass(pts, cnt, col, bound, sign, eps):
    """One batched Sutherland-Hodgman pass over padded polygons.

    ``pts`` is (N, V, r) with ``cnt`` valid vertices per row; clips every row
    to sign * (v[col] - bound) <= 0 (closed) and returns updated (pts, cnt).
    """
    n, v, r = pts.shape
    g = sign * (pts[:, :, col] - bound[:, None])
    valid = np.arange(v)[None, :] < cnt[:, None]
    inside = (g <= eps) & valid
    prev_idx = (np.arange(v)[None, :] - 1) % np.maximum(cnt, 1)[:, None]
    g_prev = np.take_along_axis(g, prev_idx, axis=1)
    in_prev = np.take_along_axis(inside, prev_idx, axis=1)
    emit_cross = (in_prev != inside) & valid
    emit_vert = inside
    n_emit = emit_cross.astype(np.int64) + emit_vert.astype(np.int64)
    starts = np.cumsum(n_emit, axis=1) - n_emit

    out = np.zeros_like(pts)
    if emit_cross.any():
        p_prev = np.take_along_axis(pts, prev_idx[:, :, None], axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = g_prev / (g_prev - g)
        t = np.clip(np.nan_to_num(t, nan=0.0, posinf=1.0, neginf=0.0), 0.0, 1.0)
        cross_pts = p_prev + t[..., None] * (pts - p_prev)
        rows, cols = np.nonzero(emit_cross)
        out[rows, starts[rows, cols]] = cross_pts[rows, cols]
    rows, cols = np.nonzero(emit_vert)
    out[rows, (starts + emit_cross)[rows, cols]] = pts[rows, cols]
    return out, n_emit.sum(axis=1)


def _batch_polygon_feasible(tris, los, his, eps):
    """Closed triangle-vs-box overlap in value space, batched over candidates.

    ``tris`` is (N, 3, r); each half-plane pass adds at most one vertex, so
    width 3 + 2r suffices.
    """
    n, _, r = tris.shape
    pts = np.zeros((n, 3 + 2 * r, r))
    pts[:, :3] = tris
    cnt = np.full(n, 3, dtype=np.int64)
    for k in range(r):
        for sign, bound in ((-1.0, los[:, k]), (1.0, his[:, k])):
            pts, cnt = _polygon_clip_pass(pts, cnt, k, bound, sign, eps)
            if not cnt.any():
                return cnt > 0
    return cnt > 0


def extract_frame(coords, values, tets, facet_tets, facet_verts, edges, eps):
    """Count fiber components and slab measure per range-space bin.

    Returns (counts, measures) as flat dense arrays over the bin spectrum in
    row-major bin order.
    """
    r = values.shape[1]
    shape = [len(e) - 1 for e in edges]
    nbins = int(np.prod(shape))
    gstrides = np.ones(r, dtype=np.int64)
    for k in range(r - 2, -1, -1):
        gstrides[k] = gstrides[k + 1] * shape[k + 1]

    n_tets = tets.shape[0]
    tv = values[tets]  # (T, 4, r)
    tc = coords[tets]  # (T, 4, 3)
    tmin = tv.min(axis=1)
    tmax = tv.max(axis=1)

    lo_idx = np.empty((n_tets, r), dtype=np.int64)
    hi_idx = np.empty((n_tets, r), dtype=np.int64)
    for k in range(r):
        e = edges[k]
        m = shape[k]
        lo = np.searchsorted(e, tmin[:, k] - eps, side="left") - 1
        hi = np.searchsorted(e, tmax[:, k] + eps, side="right") - 1
        lo_idx[:, k] = np.clip(lo, 0, m - 1)
        hi_idx[:, k] = np.clip(hi, 0, m - 1)

    spans = hi_idx - lo_idx + 1
    per_tet = spans.prod(axis=1)
    starts = np.concatenate([[0], np.cumsum(per_tet)])
    n_cand = int(starts[-1])

    cand_tet = np.repeat(np.arange(n_tets, dtype=np.int64), per_tet)
    local = np.arange(n_cand, dtype=np.int64) - starts[cand_tet]
    # mixed-radix decode: field 0 outermost, so flat bins ascend within a tet
    tstride = np.ones((n_tets, r), dtype=np.int64)
    for k in range(r - 2, -1, -1):
        tstride[:, k] = tstride[:, k + 1] * spans[:, k + 1]
    cand_idx = np.empty((n_cand, r), dtype=np.int64)
    rem = local
    for k in range(r):
        s = tstride[cand_tet, k]
        cand_idx[:, k] = lo_idx[cand_tet, k] + rem // s
        rem = rem % s
    cand_flat = cand_idx @ gstrides
    cand_lo = np.empty((n_cand, r))
    cand_hi = np.empty((n_cand, r))
    for k in range(r):
        cand_lo[:, k] = edges[k][cand_idx[:, k]]
        cand_hi[:, k] = edges[k][cand_idx[:, k] + 1]

    # batched clipping of every candidate against its bin box
    simp = np.concatenate([tc[cand_tet], tv[cand_tet]], axis=2)
    piece_cand = np.arange(n_cand, dtype=np.int64)
    for k in range(r):
        simp, piece_cand = _clip_batch(simp, piece_cand, 3 + k, cand_lo[:, k], -1.0, eps)
        simp, piece_cand = _clip_batch(simp, piece_cand, 3 + k, cand_hi[:, k], 1.0, eps)

    if simp.shape[0]:
        edge_vecs = simp[:, 1:, :3] - simp[:, :1, :3]
        piece_vol = np.abs(np.linalg.det(edge_vecs)) / 6.0
    else:
        piece_vol = np.zeros(0)
    cand_vol = np.bincount(piece_cand, weights=piece_vol, minlength=n_cand)
    exists = np.bincount(piece_cand, minlength=n_cand) > 0

    reject = np.zeros(n_cand, dtype=bool)
    for k in range(r):
        has_lower = cand_idx[:, k] > 0
        if not has_lower.any():
            continue
        vmax = np.full(n_cand, -np.inf)
        if simp.shape[0]:
            np.maximum.at(vmax, piece_cand, simp[:, :, 3 + k].max(axis=1))
        reject |= has_lower & exists & (vmax <= cand_lo[:, k] + eps)

    frag_mask = exists & ~reject
    frag_tet = cand_tet[frag_mask]
    frag_bin = cand_flat[frag_mask]
    frag_vol = cand_vol[frag_mask]
    n_frag = frag_tet.shape[0]

    measures = np.bincount(frag_bin, weights=frag_vol, minlength=nbins)
    counts = np.zeros(nbins, dtype=np.int64)
    if n_frag == 0:
        return counts, measures

    frag_count = np.bincount(frag_tet, minlength=n_tets)
    tet_start = np.concatenate([[0], np.cumsum(frag_count)])

    # adjacency candidates: shared (facet, bin) incidences found by sorting
    n_facets = facet_tets.shape[0]
    inc_tet = facet_tets.ravel().astype(np.int64)
    inc_facet = np.repeat(np.arange(n_facets, dtype=np.int64), 2)
    cnt = frag_count[inc_tet]
    row_inc = np.repeat(np.arange(2 * n_facets), cnt)
    offsets = np.arange(int(cnt.sum()), dtype=np.int64) - np.repeat(
        np.cumsum(cnt) - cnt, cnt
    )
    row_frag = tet_start[inc_tet[row_inc]] + offsets
    row_facet = inc_facet[row_inc]
    row_bin = frag_bin[row_frag]
    order = np.lexsort((row_bin, row_facet))
    rf = row_facet[order]
    rb = row_bin[order]
    rg = row_frag[order]
    dup = np.flatnonzero((rf[1:] == rf[:-1]) & (rb[1:] == rb[:-1]))
    adj_facet = rf[dup]
    adj_bin = rb[dup]
    adj_a = rg[dup]
    adj_b = rg[dup + 1]

    fvals = values[facet_verts]  # (F, 3, r)
    fmin = fvals.min(axis=1)
    fmax = fvals.max(axis=1)
    los = np.empty((adj_bin.shape[0], r))
    his = np.empty((adj_bin.shape[0], r))
    for k in range(r):
        idx_k = (adj_bin // gstrides[k]) % shape[k]
        los[:, k] = edges[k][idx_k]
        his[:, k] = edges[k][idx_k + 1]
    tri_min = fmin[adj_facet]
    tri_max = fmax[adj_facet]
    disjoint = np.any((tri_max < los - eps) | (tri_min > his + eps), axis=1)
    tris = fvals[adj_facet]
    # a vertex mapping into the closed box settles feasibility immediately
    feasible = np.all(
        (tris >= (los - eps)[:, None, :]) & (tris <= (his + eps)[:, None, :]), axis=2
    ).any(axis=1)
    todo = ~feasible & ~disjoint
    if todo.any():
        feasible[todo] = _batch_polygon_feasible(tris[todo], los[todo], his[todo], eps)

    parent = np.arange(n_frag, dtype=np.int64)
    for i in np.flatnonzero(feasible):
        ra = _find(parent, adj_a[i])
        rb_ = _find(parent, adj_b[i])
        if ra != rb_:
            if ra < rb_:
                parent[rb_] = ra
            else:
                parent[ra] = rb_

    roots = np.array([_find(parent, i) for i in range(n_frag)], dtype=np.int64)
    pair_keys = np.unique(frag_bin * n_frag + roots)
    counts = np.bincount(pair_keys // n_frag, minlength=nbins).astype(np.int64)
    return counts, measures
