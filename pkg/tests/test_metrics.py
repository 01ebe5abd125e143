import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fibertrack as ft
from fibertrack.distribution import FiberDistribution
from fibertrack.metrics import (
    DistanceConfig,
    SimilarityMatrix,
    check_metric_axioms,
    dq,
    dq_singular,
    gaussian_similarity,
    hist_intersection,
    kl_divergence,
    minkowski,
    quadratic_form,
    random_distribution_triples,
    rms_multifield,
)
from fibertrack.quantize import RangeQuantization

from conftest import make_frame


def dist(pmf, singular=None, edges=None):
    pmf = np.asarray(pmf, dtype=float)
    if edges is None:
        edges = np.arange(pmf.size + 1, dtype=float)
    quant = RangeQuantization((np.asarray(edges, float),))
    if singular is None:
        singular = np.zeros(pmf.shape, bool)
    return FiberDistribution(quant, pmf, np.asarray(singular, bool), "count")


P_HALF = [0.5, 0.5]
P_SKEW = [0.25, 0.75]


def test_dq_hand_values():
    a, b = dist(P_HALF), dist(P_SKEW)
    assert dq(a, b, 1) == pytest.approx(0.5, abs=0)
    assert dq(a, b, 2) == pytest.approx(math.sqrt(0.125), rel=1e-15)
    assert dq(a, b, math.inf) == pytest.approx(0.25, abs=0)


def test_dq_zero_on_identical():
    a = dist([0.2, 0.3, 0.5])
    for q in (1, 1.5, 2, 7, math.inf):
        assert dq(a, a, q) == 0.0


def test_dq_rejects_unaligned():
    a = dist(P_HALF)
    b = dist(P_SKEW, edges=[5.0, 6.0, 7.0])
    with pytest.raises(ValueError, match="common spectrum"):
        dq(a, b, 1)


def test_dq_singular_hand_value():
    a, b = dist(P_HALF), dist(P_SKEW)
    s = np.array([False, True])
    # 13 * 0.25 + 0.25
    assert dq_singular(a, b, s, q=1, omega=13) == pytest.approx(3.5, abs=0)


def test_dq_singular_reduces_to_d1_exactly():
    rng = np.random.default_rng(11)
    for _ in range(25):
        p = rng.random(40)
        q_ = rng.random(40)
        a = dist(p / p.sum(), singular=rng.random(40) < 0.3)
        b = dist(q_ / q_.sum(), singular=rng.random(40) < 0.3)
        assert dq_singular(a, b, None, q=1, omega=1.0) == dq(a, b, 1)  # bitwise


def test_dq_singular_all_bins_factor():
    a, b = dist(P_HALF), dist(P_SKEW)
    s = np.array([True, True])
    assert dq_singular(a, b, s, q=1, omega=13) == pytest.approx(13 * 0.5, rel=1e-15)


def test_dq_singular_dominates_dq():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p, q_ = rng.random(30), rng.random(30)
        s = rng.random(30) < 0.4
        a, b = dist(p / p.sum()), dist(q_ / q_.sum())
        assert dq_singular(a, b, s, q=2, omega=7) >= dq(a, b, 2) - 1e-15


def test_baselines_on_identical():
    a = dist([0.1, 0.6, 0.3])
    assert minkowski(a, a, 2) == 0
    assert hist_intersection(a, a) == pytest.approx(0.0, abs=1e-15)
    assert kl_divergence(a, a) == pytest.approx(0.0, abs=1e-15)
    assert quadratic_form(a, a) == 0


def test_intersection_disjoint_supports():
    a = dist([1.0, 0.0])
    b = dist([0.0, 1.0])
    assert hist_intersection(a, b) == pytest.approx(1.0, abs=0)


def test_quadratic_identity_matrix_equals_d2():
    rng = np.random.default_rng(23)
    eye = SimilarityMatrix(np.eye(25))
    for _ in range(100):
        p, q_ = rng.random(25), rng.random(25)
        a, b = dist(p / p.sum()), dist(q_ / q_.sum())
        assert quadratic_form(a, b, eye) == pytest.approx(dq(a, b, 2), abs=1e-12)


def test_power_mean_ordering():
    rng = np.random.default_rng(29)
    for _ in range(100):
        p, q_ = rng.random(25), rng.random(25)
        a, b = dist(p / p.sum()), dist(q_ / q_.sum())
        d1, d2, dinf = dq(a, b, 1), dq(a, b, 2), dq(a, b, math.inf)
        assert dinf <= d2 + 1e-15
        assert d2 <= d1 + 1e-15


def test_kl_asymmetry():
    a = dist([0.9, 0.1])
    b = dist([0.5, 0.5])
    ab = kl_divergence(a, b, 1e-9)
    ba = kl_divergence(b, a, 1e-9)
    assert ab != ba
    assert ab > 0 and ba > 0


def test_kl_needs_positive_epsilon():
    a = dist(P_HALF)
    with pytest.raises(ValueError):
        kl_divergence(a, a, 0.0)


def test_quadratic_spectrum_limit():
    quant = RangeQuantization((np.arange(5000, dtype=float),))
    with pytest.raises(ValueError, match="too large"):
        gaussian_similarity(quant)


def test_similarity_validation():
    with pytest.raises(ValueError):
        SimilarityMatrix(np.array([[1.0, 0.5], [0.4, 1.0]]))
    with pytest.raises(ValueError):
        SimilarityMatrix(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(ValueError):
        SimilarityMatrix(np.array([[0.5, 0.1], [0.1, 0.5]]))


def test_padding_leaves_metrics_unchanged():
    a = dist([0.5, 0.5])
    b = dist([0.25, 0.75])
    pad = lambda d: dist(np.concatenate([d.pmf, [0, 0, 0]]),
                         edges=np.arange(6, dtype=float))
    pa, pb = pad(a), pad(b)
    for q in (1, 2, math.inf):
        assert dq(pa, pb, q) == dq(a, b, q)
    assert hist_intersection(pa, pb) == hist_intersection(a, b)
    assert quadratic_form(pa, pb, SimilarityMatrix(np.eye(5))) == pytest.approx(
        quadratic_form(a, b, SimilarityMatrix(np.eye(2))), rel=1e-15
    )


def test_rms_multifield():
    fa = make_frame((4, 4, 4), (0, 0, 0), (1, 1, 1),
                    [("u", lambda x, y, z: x), ("v", lambda x, y, z: y * z)])
    assert rms_multifield(fa, fa) == 0.0
    shifted = make_frame((4, 4, 4), (0, 0, 0), (1, 1, 1),
                         [("u", lambda x, y, z: x + 2.5), ("v", lambda x, y, z: y * z)])
    assert rms_multifield(fa, shifted) == pytest.approx(2.5, rel=1e-15)


def test_rms_matches_direct_formula(paraboloid_series):
    fa, fb = paraboloid_series.frames[10], paraboloid_series.frames[11]
    va, vb = fa.values_matrix(), fb.values_matrix()
    expected = np.sqrt(np.sum((va - vb) ** 2) / va.shape[0])
    assert rms_multifield(fa, fb) == pytest.approx(expected, rel=1e-15)


def test_rms_rejects_dim_mismatch():
    fa = make_frame((4, 4, 4), (0, 0, 0), (1, 1, 1), [("u", lambda x, y, z: x)])
    fb = make_frame((5, 4, 4), (0, 0, 0), (1, 1, 1), [("u", lambda x, y, z: x)])
    with pytest.raises(ValueError):
        rms_multifield(fa, fb)


def test_axiom_harness_clean_on_random_triples():
    rng = np.random.default_rng(1234)
    triples = random_distribution_triples(300, 24, rng)
    for q in (1.0, 2.0, math.inf):
        report = check_metric_axioms(triples, q, omega=13.0)
        assert report.ok, report.violations[:3]
        assert report.worst_triangle <= 1e-12


def test_axiom_harness_degenerate_triple():
    p = dist([0.3, 0.3, 0.4])
    report = check_metric_axioms([(p, p, p)], q=2.0, omega=5.0)
    assert report.ok
    assert report.worst_symmetry == 0.0
    assert report.worst_triangle <= 0.0


def test_axiom_harness_equal_pmfs_different_flags():
    # singular flags may differ between equal distributions; the weighted
    # distance must still be exactly zero
    pmf = [0.3, 0.3, 0.4]
    p1 = dist(pmf, singular=[True, False, False])
    p2 = dist(pmf, singular=[False, True, False])
    p3 = dist(pmf, singular=[False, False, True])
    report = check_metric_axioms([(p1, p2, p3)], q=1.0, omega=25.0)
    assert report.ok
    assert dq_singular(p1, p2, None, 1, 25.0) == 0.0


def test_distance_config_validation():
    with pytest.raises(ValueError):
        DistanceConfig(q=0.5)
    with pytest.raises(ValueError):
        DistanceConfig(omega=0.5)
    with pytest.raises(ValueError):
        DistanceConfig(kl_epsilon=0.0)
    assert DistanceConfig(q=math.inf).q == math.inf


@settings(max_examples=60, deadline=None)
@given(
    data=st.lists(
        st.tuples(st.floats(0.01, 1.0), st.floats(0.01, 1.0), st.floats(0.01, 1.0)),
        min_size=2,
        max_size=20,
    ),
    q=st.sampled_from([1.0, 1.5, 2.0, 3.0, math.inf]),
)
def test_triangle_inequality_property(data, q):
    arr = np.array(data)
    p1, p2, p3 = (dist(c / c.sum()) for c in arr.T)
    d13 = dq(p1, p3, q)
    d12 = dq(p1, p2, q)
    d23 = dq(p2, p3, q)
    assert d13 <= d12 + d23 + 1e-12
