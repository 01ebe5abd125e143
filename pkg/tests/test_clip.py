import numpy as np
import pytest

from fibertrack.extract import clip_tet_by_bin, facet_feasible
from fibertrack.model import Tetrahedron
from fibertrack.quantize import RangeQuantization

from oracles import mc_clipped_volume

UNIT_TET = np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]])


def make_tet(values):
    return Tetrahedron(0, np.arange(4), UNIT_TET.copy(), np.asarray(values, float))


def test_full_range_bin_returns_whole_tet():
    # f = z spans [0, 1]; the bin covers it, so the clip is the tet itself
    tet = make_tet(UNIT_TET[:, 2:3])
    quant = RangeQuantization((np.array([-1.0, 2.0]),))
    frag = clip_tet_by_bin(tet, (0,), quant)
    assert frag is not None
    assert frag.volume == pytest.approx(1 / 6, rel=1e-12)


def test_disjoint_bin_returns_none():
    tet = make_tet(UNIT_TET[:, 2:3])
    quant = RangeQuantization((np.array([2.0, 3.0, 4.0]),))
    assert clip_tet_by_bin(tet, (0,), quant) is None
    assert clip_tet_by_bin(tet, (1,), quant) is None


def test_clipped_volume_matches_monte_carlo():
    tet = make_tet(UNIT_TET[:, 2:3])  # f = z
    quant = RangeQuantization((np.array([0.0, 0.4, 1.0]),))
    frag = clip_tet_by_bin(tet, (0,), quant)
    rng = np.random.default_rng(20240817)
    est, sigma = mc_clipped_volume(UNIT_TET, tet.values, [(0.0, 0.4)], 10**6, rng)
    assert abs(frag.volume - est) <= 3 * sigma
    # and the prism piece analytically: 1/6 - (1-h)^3/6
    assert frag.volume == pytest.approx((1 - 0.6**3) / 6, rel=1e-12)


def test_bivariate_clip_volume_matches_monte_carlo():
    values = np.column_stack([UNIT_TET[:, 2], UNIT_TET[:, 0] - UNIT_TET[:, 1]])
    tet = make_tet(values)
    quant = RangeQuantization(
        (np.array([0.0, 0.3, 1.0]), np.array([-1.0, 0.2, 1.0]))
    )
    box = [(0.0, 0.3), (-1.0, 0.2)]
    frag = clip_tet_by_bin(tet, (0, 0), quant)
    rng = np.random.default_rng(7)
    est, sigma = mc_clipped_volume(UNIT_TET, values, box, 10**6, rng)
    assert frag is not None
    assert abs(frag.volume - est) <= 3 * sigma


def test_clip_pieces_tile_the_tet():
    # the per-bin volumes of one tet must add up to the tet volume
    values = np.column_stack([UNIT_TET[:, 2], UNIT_TET[:, 0] + 2 * UNIT_TET[:, 1]])
    tet = make_tet(values)
    quant = RangeQuantization(
        (np.linspace(0, 1, 5), np.linspace(0, 3, 7))
    )
    total = 0.0
    for i in range(4):
        for j in range(6):
            frag = clip_tet_by_bin(tet, (i, j), quant)
            if frag is not None:
                total += frag.volume
    assert total == pytest.approx(1 / 6, rel=1e-9)


def test_flat_contact_fragment_is_kept():
    # bin boundary exactly on the tet's face z = 0: closed clip keeps a
    # zero-volume fragment
    tet = make_tet(UNIT_TET[:, 2:3])
    quant = RangeQuantization((np.array([-1.0, 0.0, 1.0]),))
    frag = clip_tet_by_bin(tet, (0,), quant)
    assert frag is not None
    assert frag.volume <= 1e-18


def test_facet_feasible_inside_and_disjoint():
    quant = RangeQuantization((np.array([0.0, 1.0, 2.0]), np.array([0.0, 1.0])))
    tri_inside = np.array([[0.1, 0.5], [0.4, 0.2], [0.9, 0.9]])
    assert facet_feasible(tri_inside, (0, 0), quant)
    tri_outside = np.array([[1.2, 0.5], [1.4, 0.2], [1.9, 0.9]])
    assert not facet_feasible(tri_outside, (0, 0), quant)
    assert facet_feasible(tri_outside, (1, 0), quant)


def test_facet_feasible_boundary_grazing_edge():
    # only the edge f1 = 1 of the triangle satisfies the first constraint;
    # closed evaluation must still report feasibility
    quant = RangeQuantization((np.array([0.0, 1.0, 2.0]), np.array([0.0, 2.0])))
    tri = np.array([[1.0, 0.0], [1.0, 1.0], [0.5, 0.5]])
    assert facet_feasible(tri, (1, 0), quant)
    # dense barycentric sampling oracle agrees: some point satisfies both
    rng = np.random.default_rng(3)
    w = rng.dirichlet(np.ones(3), size=4000)
    # include the corners and edge midpoints explicitly
    w = np.vstack([w, np.eye(3), (np.ones((3, 3)) - np.eye(3)) / 2])
    pts = w @ tri
    ok = (pts[:, 0] >= 1.0) & (pts[:, 0] <= 2.0) & (pts[:, 1] >= 0.0) & (pts[:, 1] <= 2.0)
    assert ok.any()


def test_facet_feasible_needs_matching_arity():
    quant = RangeQuantization((np.array([0.0, 1.0]),))
    with pytest.raises(ValueError):
        facet_feasible(np.zeros((3, 2)), (0,), quant)
