# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
# cython: cdivision=True
"""Compiled extraction kernel.

Scalar-loop twin of the numpy fallback in ``_extract_py``: same clipping,
the same closed-constraint tolerance, the same lower-edge fragment
assignment, the same facet adjacency rule.  The two kernels must stay
result-interchangeable; ``_extract_py`` is the readable reference.
"""

import numpy as np

from libcpp.vector cimport vector
from libcpp.pair cimport pair
from libcpp.algorithm cimport sort

ctypedef long long i64

BACKEND_NAME = "compiled"

DEF MAXD = 16  # 3 coordinates + up to 13 fields


cdef inline void _copy_vert(double* dst, const double* src, int D):
    cdef int i
    for i in range(D):
        dst[i] = src[i]


cdef inline void _lerp_into(double* out, const double* a, const double* b,
                            double ga, double gb, int D):
    cdef double t = ga / (ga - gb)
    cdef int i
    if t < 0.0:
        t = 0.0
    elif t > 1.0:
        t = 1.0
    for i in range(D):
        out[i] = a[i] + t * (b[i] - a[i])


cdef inline void _push_piece(vector[double]& dst, const double* verts, int D):
    cdef int i
    for i in range(4 * D):
        dst.push_back(verts[i])


cdef inline void _push_corner_tet(vector[double]& dst, const double* corners,
                                  int D, int c0, int c1, int c2, int c3):
    cdef int i
    for i in range(D):
        dst.push_back(corners[c0 * D + i])
    for i in range(D):
        dst.push_back(corners[c1 * D + i])
    for i in range(D):
        dst.push_back(corners[c2 * D + i])
    for i in range(D):
        dst.push_back(corners[c3 * D + i])


cdef inline void _push_wedge(vector[double]& dst, const double* corners, int D):
    # staircase split of the wedge (0,1,2 | 3,4,5), matched across quads
    _push_corner_tet(dst, corners, D, 0, 1, 2, 3)
    _push_corner_tet(dst, corners, D, 1, 2, 3, 4)
    _push_corner_tet(dst, corners, D, 2, 3, 4, 5)


cdef i64 _clip_plane(vector[double]& src, vector[double]& dst, int D, int col,
                     double bound, double sign, double eps):
    """Clip all pieces to sign * (v[col] - bound) <= 0 (closed with eps)."""
    dst.clear()
    cdef i64 npieces = (<i64>src.size()) // (4 * D)
    cdef i64 p
    cdef int i, ni, no
    cdef double g[4]
    cdef int ins[4]
    cdef int outs[4]
    cdef double corners[6 * MAXD]
    cdef const double* v
    for p in range(npieces):
        v = &src[<size_t>(p * 4 * D)]
        ni = 0
        no = 0
        for i in range(4):
            g[i] = sign * (v[i * D + col] - bound)
            if g[i] <= eps:
                ins[ni] = i
                ni += 1
            else:
                outs[no] = i
                no += 1
        if ni == 4:
            _push_piece(dst, v, D)
        elif ni == 0:
            continue
        elif ni == 1:
            _copy_vert(corners, v + ins[0] * D, D)
            _lerp_into(corners + D, v + ins[0] * D, v + outs[0] * D,
                       g[ins[0]], g[outs[0]], D)
            _lerp_into(corners + 2 * D, v + ins[0] * D, v + outs[1] * D,
                       g[ins[0]], g[outs[1]], D)
            _lerp_into(corners + 3 * D, v + ins[0] * D, v + outs[2] * D,
                       g[ins[0]], g[outs[2]], D)
            _push_corner_tet(dst, corners, D, 0, 1, 2, 3)
        elif ni == 2:
            _copy_vert(corners, v + ins[0] * D, D)
            _lerp_into(corners + D, v + ins[0] * D, v + outs[0] * D,
                       g[ins[0]], g[outs[0]], D)
            _lerp_into(corners + 2 * D, v + ins[0] * D, v + outs[1] * D,
                       g[ins[0]], g[outs[1]], D)
            _copy_vert(corners + 3 * D, v + ins[1] * D, D)
            _lerp_into(corners + 4 * D, v + ins[1] * D, v + outs[0] * D,
                       g[ins[1]], g[outs[0]], D)
            _lerp_into(corners + 5 * D, v + ins[1] * D, v + outs[1] * D,
                       g[ins[1]], g[outs[1]], D)
            _push_wedge(dst, corners, D)
        else:  # ni == 3
            _copy_vert(corners, v + ins[0] * D, D)
            _copy_vert(corners + D, v + ins[1] * D, D)
            _copy_vert(corners + 2 * D, v + ins[2] * D, D)
            _lerp_into(corners + 3 * D, v + ins[0] * D, v + outs[0] * D,
                       g[ins[0]], g[outs[0]], D)
            _lerp_into(corners + 4 * D, v + ins[1] * D, v + outs[0] * D,
                       g[ins[1]], g[outs[0]], D)
            _lerp_into(corners + 5 * D, v + ins[2] * D, v + outs[0] * D,
                       g[ins[2]], g[outs[0]], D)
            _push_wedge(dst, corners, D)
    return (<i64>dst.size()) // (4 * D)


cdef inline i64 _lower_edge_bin(vector[double]& e, double v):
    # smallest bin i with e[i+1] >= v, clamped to [0, m-1]
    cdef i64 n = <i64>e.size()
    cdef i64 lo = 0, hi = n, mid, i
    while lo < hi:
        mid = (lo + hi) // 2
        if e[<size_t>mid] < v:
            lo = mid + 1
        else:
            hi = mid
    i = lo - 1
    if i < 0:
        i = 0
    if i > n - 2:
        i = n - 2
    return i


cdef inline i64 _upper_edge_bin(vector[double]& e, double v):
    # largest bin i with e[i] <= v, clamped to [0, m-1]
    cdef i64 n = <i64>e.size()
    cdef i64 lo = 0, hi = n, mid, i
    while lo < hi:
        mid = (lo + hi) // 2
        if e[<size_t>mid] <= v:
            lo = mid + 1
        else:
            hi = mid
    i = lo - 1
    if i < 0:
        i = 0
    if i > n - 2:
        i = n - 2
    return i


cdef bint _facet_feasible_c(const double* tri, int r, const double* lo,
                            const double* hi, double eps):
    """Closed Sutherland-Hodgman clip of the value-space triangle by the box."""
    cdef vector[double] poly
    cdef vector[double] nxt
    cdef int k, side, side2, i, n, ip
    cdef double bound, sign, ga, gb, t
    cdef const double* a
    cdef const double* b
    poly.assign(tri, tri + 3 * r)
    for k in range(r):
        for side in range(2):
            if side == 0:
                bound = lo[k]
                sign = -1.0
            else:
                bound = hi[k]
                sign = 1.0
            n = <int>(poly.size()) // r
            if n == 0:
                return False
            nxt.clear()
            for i in range(n):
                ip = i - 1
                if ip < 0:
                    ip = n - 1
                a = &poly[<size_t>(ip * r)]
                b = &poly[<size_t>(i * r)]
                ga = sign * (a[k] - bound)
                gb = sign * (b[k] - bound)
                if (ga <= eps) != (gb <= eps):
                    t = ga / (ga - gb)
                    if t < 0.0:
                        t = 0.0
                    elif t > 1.0:
                        t = 1.0
                    for side2 in range(r):
                        nxt.push_back(a[side2] + t * (b[side2] - a[side2]))
                if gb <= eps:
                    for side2 in range(r):
                        nxt.push_back(b[side2])
            poly.swap(nxt)
    return poly.size() > 0


cdef inline i64 _find(vector[i64]& parent, i64 x):
    while parent[<size_t>x] != x:
        parent[<size_t>x] = parent[<size_t>parent[<size_t>x]]
        x = parent[<size_t>x]
    return x


def extract_frame(const double[:, ::1] coords, const double[:, ::1] values,
                  const int[:, ::1] tets, const int[:, ::1] facet_tets,
                  const int[:, ::1] facet_verts, list edges, double eps):
    """Count fiber components and slab measure per bin; dense flat outputs."""
    cdef int r = values.shape[1]
    cdef int D = 3 + r
    if D > MAXD:
        raise ValueError(f"compiled kernel supports at most {MAXD - 3} fields")
    if len(edges) != r:
        raise ValueError("edges list does not match the field count")

    cdef vector[vector[double]] E
    cdef const double[::1] earr
    cdef int k, i, j
    E.resize(r)
    for k in range(r):
        earr = np.ascontiguousarray(edges[k], dtype=np.float64)
        E[k].assign(&earr[0], &earr[0] + earr.shape[0])

    cdef vector[i64] shape_v
    cdef vector[i64] gstride
    shape_v.resize(r)
    gstride.resize(r)
    cdef i64 nbins = 1
    for k in range(r):
        shape_v[k] = <i64>E[k].size() - 1
        nbins *= shape_v[k]
    gstride[r - 1] = 1
    for k in range(r - 2, -1, -1):
        gstride[k] = gstride[k + 1] * shape_v[k + 1]

    counts_np = np.zeros(nbins, dtype=np.int64)
    measures_np = np.zeros(nbins, dtype=np.float64)
    cdef i64[::1] counts = counts_np
    cdef double[::1] measures = measures_np

    cdef i64 n_tets = tets.shape[0]
    cdef i64 t, flat, cand_total
    cdef int vid
    cdef double tetbuf[4 * MAXD]
    cdef double fmin[MAXD]
    cdef double fmax[MAXD]
    cdef i64 lo_bin[MAXD]
    cdef i64 hi_bin[MAXD]
    cdef i64 idx[MAXD]
    cdef double blo[MAXD]
    cdef double bhi[MAXD]
    cdef double vmaxf[MAXD]
    cdef double val, vol, det
    cdef double e10[3]
    cdef double e20[3]
    cdef double e30[3]
    cdef vector[double] bufA
    cdef vector[double] bufB
    cdef i64 npieces
    cdef int field_k, empty, rejected, digit
    cdef const double* pv

    cdef vector[i64] frag_tet
    cdef vector[i64] frag_bin
    cdef vector[double] frag_vol
    cdef vector[i64] tet_start
    tet_start.resize(<size_t>(n_tets + 1))

    for t in range(n_tets):
        tet_start[<size_t>t] = <i64>frag_bin.size()
        for i in range(4):
            vid = tets[t, i]
            for j in range(3):
                tetbuf[i * D + j] = coords[vid, j]
            for k in range(r):
                tetbuf[i * D + 3 + k] = values[vid, k]
        for k in range(r):
            fmin[k] = tetbuf[3 + k]
            fmax[k] = tetbuf[3 + k]
            for i in range(1, 4):
                val = tetbuf[i * D + 3 + k]
                if val < fmin[k]:
                    fmin[k] = val
                if val > fmax[k]:
                    fmax[k] = val
            lo_bin[k] = _lower_edge_bin(E[k], fmin[k] - eps)
            hi_bin[k] = _upper_edge_bin(E[k], fmax[k] + eps)
            idx[k] = lo_bin[k]

        while True:
            flat = 0
            for k in range(r):
                flat += idx[k] * gstride[k]
                blo[k] = E[k][<size_t>idx[k]]
                bhi[k] = E[k][<size_t>(idx[k] + 1)]

            # clip the tet against the bin box, field by field
            bufA.clear()
            for i in range(4 * D):
                bufA.push_back(tetbuf[i])
            empty = 0
            for field_k in range(r):
                npieces = _clip_plane(bufA, bufB, D, 3 + field_k, blo[field_k], -1.0, eps)
                bufA.swap(bufB)
                if npieces == 0:
                    empty = 1
                    break
                npieces = _clip_plane(bufA, bufB, D, 3 + field_k, bhi[field_k], 1.0, eps)
                bufA.swap(bufB)
                if npieces == 0:
                    empty = 1
                    break

            if not empty:
                npieces = (<i64>bufA.size()) // (4 * D)
                vol = 0.0
                for k in range(r):
                    vmaxf[k] = -1e300
                for j in range(npieces):
                    pv = &bufA[<size_t>(j * 4 * D)]
                    for i in range(3):
                        e10[i] = pv[D + i] - pv[i]
                        e20[i] = pv[2 * D + i] - pv[i]
                        e30[i] = pv[3 * D + i] - pv[i]
                    det = (e10[0] * (e20[1] * e30[2] - e20[2] * e30[1])
                           - e10[1] * (e20[0] * e30[2] - e20[2] * e30[0])
                           + e10[2] * (e20[0] * e30[1] - e20[1] * e30[0]))
                    vol += (det if det >= 0 else -det) / 6.0
                    for i in range(4):
                        for k in range(r):
                            val = pv[i * D + 3 + k]
                            if val > vmaxf[k]:
                                vmaxf[k] = val
                # fragments entirely on a lower bin edge belong to the bin below
                rejected = 0
                for k in range(r):
                    if idx[k] > 0 and vmaxf[k] <= blo[k] + eps:
                        rejected = 1
                        break
                if not rejected:
                    frag_tet.push_back(t)
                    frag_bin.push_back(flat)
                    frag_vol.push_back(vol)
                    measures[flat] += vol

            # odometer over the candidate bin ranges, last field fastest
            digit = r - 1
            while digit >= 0:
                idx[digit] += 1
                if idx[digit] <= hi_bin[digit]:
                    break
                idx[digit] = lo_bin[digit]
                digit -= 1
            if digit < 0:
                break
    tet_start[<size_t>n_tets] = <i64>frag_bin.size()

    cdef i64 n_frag = <i64>frag_bin.size()
    if n_frag == 0:
        return counts_np, measures_np

    cdef vector[i64] parent
    parent.resize(<size_t>n_frag)
    for t in range(n_frag):
        parent[<size_t>t] = t

    # facet pass: same-bin fragments on both sides merge when the facet's
    # value-space triangle meets the bin box
    cdef i64 n_facets = facet_tets.shape[0]
    cdef i64 f, ta, tb, pa, pb, ea, eb, ra, rb
    cdef double tmin_k, tmax_k
    cdef double tri[3 * MAXD]
    cdef int all_inside, any_disjoint, va
    for f in range(n_facets):
        ta = facet_tets[f, 0]
        tb = facet_tets[f, 1]
        pa = tet_start[<size_t>ta]
        ea = tet_start[<size_t>(ta + 1)]
        pb = tet_start[<size_t>tb]
        eb = tet_start[<size_t>(tb + 1)]
        if pa == ea or pb == eb:
            continue
        while pa < ea and pb < eb:
            if frag_bin[<size_t>pa] < frag_bin[<size_t>pb]:
                pa += 1
                continue
            if frag_bin[<size_t>pb] < frag_bin[<size_t>pa]:
                pb += 1
                continue
            flat = frag_bin[<size_t>pa]
            for k in range(r):
                idx[k] = (flat // gstride[k]) % shape_v[k]
                blo[k] = E[k][<size_t>idx[k]]
                bhi[k] = E[k][<size_t>(idx[k] + 1)]
            for i in range(3):
                va = facet_verts[f, i]
                for k in range(r):
                    tri[i * r + k] = values[va, k]
            all_inside = 1
            any_disjoint = 0
            for k in range(r):
                tmin_k = tri[k]
                tmax_k = tri[k]
                for i in range(1, 3):
                    val = tri[i * r + k]
                    if val < tmin_k:
                        tmin_k = val
                    if val > tmax_k:
                        tmax_k = val
                if tmin_k < blo[k] - eps or tmax_k > bhi[k] + eps:
                    all_inside = 0
                if tmax_k < blo[k] - eps or tmin_k > bhi[k] + eps:
                    any_disjoint = 1
            if all_inside or (not any_disjoint
                              and _facet_feasible_c(tri, r, blo, bhi, eps)):
                ra = _find(parent, pa)
                rb = _find(parent, pb)
                if ra != rb:
                    if ra < rb:
                        parent[<size_t>rb] = ra
                    else:
                        parent[<size_t>ra] = rb
            pa += 1
            pb += 1

    cdef vector[pair[i64, i64]] pairs
    pairs.resize(<size_t>n_frag)
    for t in range(n_frag):
        pairs[<size_t>t] = pair[i64, i64](frag_bin[<size_t>t], _find(parent, t))
    sort(pairs.begin(), pairs.end())
    for t in range(n_frag):
        if t == 0 or pairs[<size_t>t] != pairs[<size_t>(t - 1)]:
            counts[pairs[<size_t>t].first] += 1
    return counts_np, measures_np
