"""Distances between fiber-component distributions and the series pipeline.

The family d_q (sum of |p1 - p2|^q to the 1/q; sup for q = inf) and its
singular-weighted variant, where differences on singular bins are scaled by
omega >= 1 before the final root, plus the classical histogram baselines
(Minkowski, intersection, KL divergence, quadratic form), a multifield RMS
baseline on raw grids, and a metric-axiom test harness.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distribution import FiberDistribution, to_distribution
from .extract import FiberComponentHistogram, extract_fiber_components
from .jacobi import DEFAULT_TAU, SingularBinSet, mark_singular_elements, project_singular_bins
from .model import FrameSeries, MultifieldFrame
from .quantize import RangeQuantization, build_quantization

__all__ = [
    "DistanceConfig",
    "SimilarityMatrix",
    "DistanceSeries",
    "FrameProduct",
    "dq",
    "dq_singular",
    "minkowski",
    "hist_intersection",
    "kl_divergence",
    "quadratic_form",
    "gaussian_similarity",
    "rms_multifield",
    "check_metric_axioms",
    "AxiomReport",
    "random_distribution_triples",
    "series_products",
    "distance_series_from_products",
    "compute_distance_series",
    "ALL_METRICS",
    "DEFAULT_BIN_COUNT",
]

ALL_METRICS = (
    "d1",
    "d2",
    "dinf",
    "dqS",
    "minkowski",
    "intersection",
    "kl",
    "quadratic",
    "rms",
)

DEFAULT_BIN_COUNT = 16
QUADRATIC_MAX_BINS = 4096


@dataclass(frozen=True)
class DistanceConfig:
    """Metric parameters: exponent q, singular weight omega, KL smoothing,
    quadratic-form bandwidth, Minkowski baseline exponent."""

    q: float = 1.0
    omega: float = 13.0
    kl_epsilon: float = 1e-9
    sigma_a: float = 1.0
    minkowski_r: float = 2.0

    def __post_init__(self):
        if not (self.q >= 1.0 or math.isinf(self.q)):
            raise ValueError("q must be >= 1 (or inf)")
        if self.omega < 1.0:
            raise ValueError("omega must be >= 1")
        if self.kl_epsilon <= 0:
            raise ValueError("kl_epsilon must be > 0")
        if self.sigma_a <= 0:
            raise ValueError("sigma_a must be > 0")
        if self.minkowski_r < 1.0:
            raise ValueError("minkowski_r must be >= 1")


@dataclass(frozen=True)
class SimilarityMatrix:
    """Symmetric bin-similarity matrix with unit diagonal, entries in [0, 1]."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("similarity matrix must be square")
        if not np.allclose(m, m.T, atol=1e-12):
            raise ValueError("similarity matrix must be symmetric")
        if (m < 0).any() or (m > 1).any():
            raise ValueError("similarity entries must lie in [0, 1]")
        if not np.allclose(np.diag(m), 1.0, atol=1e-12):
            raise ValueError("similarity diagonal must be 1")
        object.__setattr__(self, "matrix", m)


def _require_aligned(a: FiberDistribution, b: FiberDistribution):
    if a.quantization.shape != b.quantization.shape or not all(
        np.array_equal(ea, eb)
        for ea, eb in zip(a.quantization.edges, b.quantization.edges)
    ):
        raise ValueError("distributions are not on a common spectrum; align them first")


def dq(a: FiberDistribution, b: FiberDistribution, q: float) -> float:
    """Point-wise distance (sum |p1-p2|^q)^(1/q); sup difference for q=inf."""
    _require_aligned(a, b)
    if not (q >= 1.0 or math.isinf(q)):
        raise ValueError("q must be >= 1 (or inf)")
    diff = np.abs(a.pmf - b.pmf)
    if math.isinf(q):
        return float(diff.max())
    if q == 1.0:
        return float(diff.sum())
    return float((diff**q).sum() ** (1.0 / q))


def dq_singular(
    a: FiberDistribution,
    b: FiberDistribution,
    singular=None,
    q: float = 1.0,
    omega: float = 13.0,
) -> float:
    """Singular-weighted distance: differences on singular bins scale by omega.

    ``singular`` may be a SingularBinSet, a boolean array on the common
    spectrum, or None to use the union of the two distributions' own flags.
    For q = inf the weight washes out of the sup limit, leaving the plain sup
    difference.
    """
    _require_aligned(a, b)
    if omega < 1.0:
        raise ValueError("omega must be >= 1")
    if singular is None:
        flags = a.singular | b.singular
    elif isinstance(singular, SingularBinSet):
        flags = singular.flags
    else:
        flags = np.asarray(singular, dtype=bool)
    if flags.shape != a.pmf.shape:
        raise ValueError("singular flag shape does not match the spectrum")
    diff = np.abs(a.pmf - b.pmf)
    if math.isinf(q):
        return float(diff.max())
    weights = np.where(flags, omega, 1.0)
    if q == 1.0:
        return float((weights * diff).sum())
    return float((weights * diff**q).sum() ** (1.0 / q))


def minkowski(a: FiberDistribution, b: FiberDistribution, r: float) -> float:
    """Minkowski-form baseline with exponent r on the aligned pmfs."""
    return dq(a, b, r)


def hist_intersection(a: FiberDistribution, b: FiberDistribution) -> float:
    """One minus the overlapping mass, normalized by the second histogram."""
    _require_aligned(a, b)
    denom = float(b.pmf.sum())
    return float(1.0 - np.minimum(a.pmf, b.pmf).sum() / denom)


def kl_divergence(
    a: FiberDistribution, b: FiberDistribution, epsilon: float = 1e-9
) -> float:
    """KL divergence with epsilon smoothing, defined on zero-padded spectra.

    Both pmfs are replaced by (p + eps) / (1 + eps * m) before evaluation so
    empty bins do not blow up; the result is non-symmetric by nature.
    """
    _require_aligned(a, b)
    if epsilon <= 0:
        raise ValueError("epsilon must be > 0")
    m = a.pmf.size
    p = (a.pmf + epsilon) / (1.0 + epsilon * m)
    q = (b.pmf + epsilon) / (1.0 + epsilon * m)
    return float(np.sum(p * np.log(p / q)))


def gaussian_similarity(quant: RangeQuantization, sigma_a: float = 1.0) -> SimilarityMatrix:
    """Gaussian similarity on bin-index Euclidean distance, a_ij in (0, 1]."""
    n = quant.n_bins
    if n > QUADRATIC_MAX_BINS:
        raise ValueError(
            f"quadratic-form spectrum too large: {n} bins > {QUADRATIC_MAX_BINS}"
        )
    idx = np.indices(quant.shape).reshape(quant.n_fields, -1).T.astype(np.float64)
    d2 = ((idx[:, None, :] - idx[None, :, :]) ** 2).sum(axis=2)
    return SimilarityMatrix(np.exp(-d2 / sigma_a**2))


def quadratic_form(
    a: FiberDistribution,
    b: FiberDistribution,
    similarity: SimilarityMatrix | None = None,
    sigma_a: float = 1.0,
) -> float:
    """Cross-bin distance sqrt((h-k)^T A (h-k)) with similarity matrix A."""
    _require_aligned(a, b)
    if similarity is None:
        similarity = gaussian_similarity(a.quantization, sigma_a)
    mat = similarity.matrix
    d = (a.pmf - b.pmf).ravel()
    if mat.shape[0] != d.size:
        raise ValueError("similarity matrix size does not match the spectrum")
    return float(np.sqrt(max(d @ mat @ d, 0.0)))


def rms_multifield(fa: MultifieldFrame, fb: MultifieldFrame) -> float:
    """Root mean (over grid points) of summed squared per-field differences."""
    if fa.grid.dims != fb.grid.dims:
        raise ValueError("frames have different grid dims")
    if fa.r != fb.r:
        raise ValueError("frames have different field counts")
    da = fa.values_matrix()
    db = fb.values_matrix()
    m = da.shape[0]
    return float(np.sqrt(((da - db) ** 2).sum() / m))


# ---------------------------------------------------------------------------
# metric-axiom harness


@dataclass
class AxiomReport:
    """Outcome of axiom checks over a batch of distribution triples."""

    n_triples: int
    q: float
    omega: float
    violations: list[str] = field(default_factory=list)
    worst_nonneg: float = 0.0  # most negative distance seen
    worst_symmetry: float = 0.0  # max |d(a,b) - d(b,a)|
    worst_triangle: float = 0.0  # max d13 - (d12 + d23)
    identity_failures: int = 0

    @property
    def ok(self) -> bool:
        return not self.violations


def check_metric_axioms(
    triples,
    q: float,
    omega: float = 1.0,
    identity_tol: float = 1e-15,
    triangle_tol: float = 1e-12,
) -> AxiomReport:
    """Verify non-negativity, identity, symmetry and the triangle inequality.

    Runs both the plain and the singular-weighted distance on every triple;
    the weighted one uses the union of the three distributions' singular
    flags as its fixed singular set.  Violations are reported, not raised.
    """
    report = AxiomReport(n_triples=0, q=q, omega=omega)
    for tnum, (p1, p2, p3) in enumerate(triples):
        report.n_triples += 1
        flags = p1.singular | p2.singular | p3.singular
        for name, dist in (
            ("dq", lambda x, y: dq(x, y, q)),
            ("dqS", lambda x, y: dq_singular(x, y, flags, q, omega)),
        ):
            d12 = dist(p1, p2)
            d21 = dist(p2, p1)
            d23 = dist(p2, p3)
            d13 = dist(p1, p3)
            for val, tag in ((d12, "d12"), (d23, "d23"), (d13, "d13")):
                if val < 0:
                    report.violations.append(f"triple {tnum}: {name} {tag} negative: {val}")
                    report.worst_nonneg = min(report.worst_nonneg, val)
            sym_gap = abs(d12 - d21)
            report.worst_symmetry = max(report.worst_symmetry, sym_gap)
            if sym_gap != 0.0:
                report.violations.append(
                    f"triple {tnum}: {name} asymmetric by {sym_gap}"
                )
            max_gap = float(np.abs(p1.pmf - p2.pmf).max())
            if max_gap <= identity_tol and d12 > identity_tol * p1.pmf.size * omega:
                report.identity_failures += 1
                report.violations.append(
                    f"triple {tnum}: {name} equal pmfs at distance {d12}"
                )
            if max_gap > identity_tol * p1.pmf.size and d12 == 0.0:
                report.identity_failures += 1
                report.violations.append(
                    f"triple {tnum}: {name} distinct pmfs at distance 0"
                )
            tri_gap = d13 - (d12 + d23)
            report.worst_triangle = max(report.worst_triangle, tri_gap)
            if tri_gap > triangle_tol:
                report.violations.append(
                    f"triple {tnum}: {name} triangle violated by {tri_gap}"
                )
    return report


def random_distribution_triples(
    n_triples: int,
    n_bins: int,
    rng: np.random.Generator,
    singular_fraction: float = 0.25,
    sparsity: float = 0.5,
):
    """Random aligned distribution triples with random singular flags."""
    quant = RangeQuantization(edges=(np.arange(n_bins + 1, dtype=np.float64),))
    triples = []
    for _ in range(n_triples):
        dists = []
        for _ in range(3):
            pmf = rng.random(n_bins) * (rng.random(n_bins) < sparsity)
            if pmf.sum() == 0:
                pmf[rng.integers(n_bins)] = 1.0
            pmf = pmf / pmf.sum()
            flags = rng.random(n_bins) < singular_fraction
            dists.append(FiberDistribution(quant, pmf, flags, "count"))
        triples.append(tuple(dists))
    return triples


# ---------------------------------------------------------------------------
# series pipeline


@dataclass(frozen=True)
class FrameProduct:
    """Everything the distance stage needs from one frame."""

    histogram: FiberComponentHistogram
    distribution: FiberDistribution
    singular: SingularBinSet


@dataclass
class DistanceSeries:
    """Per-consecutive-pair metric values across a series."""

    site_pairs: list[tuple[int, int]]
    values: dict[str, np.ndarray]

    def __post_init__(self):
        n = len(self.site_pairs)
        for name, arr in self.values.items():
            if arr.shape != (n,):
                raise ValueError(f"metric {name!r} has {arr.shape[0]} values for {n} pairs")


def series_products(
    series: FrameSeries,
    quant: RangeQuantization | None = None,
    slab_widths=None,
    bin_counts=None,
    tau: float = DEFAULT_TAU,
    mode: str = "count",
    backend: str | None = None,
) -> tuple[RangeQuantization, list[FrameProduct]]:
    """Run quantize + extract + singular-bin stages for every frame."""
    if quant is None:
        if slab_widths is None and bin_counts is None:
            bin_counts = DEFAULT_BIN_COUNT
        quant = build_quantization(series, slab_widths=slab_widths, bin_counts=bin_counts)
    products = []
    for frame in series.frames:
        hist = extract_fiber_components(frame, quant, backend=backend)
        jset = mark_singular_elements(frame, tau)
        sbins = project_singular_bins(jset, frame, quant)
        hist.set_singular(sbins.flags)
        dist = to_distribution(hist, mode)
        products.append(FrameProduct(histogram=hist, distribution=dist, singular=sbins))
    return quant, products


def distance_series_from_products(
    series: FrameSeries,
    products: list[FrameProduct],
    config: DistanceConfig = DistanceConfig(),
    metrics=ALL_METRICS,
) -> DistanceSeries:
    """Assemble the per-pair metric table from precomputed frame products."""
    unknown = set(metrics) - set(ALL_METRICS)
    if unknown:
        raise ValueError(f"unknown metrics {sorted(unknown)}; valid: {ALL_METRICS}")
    labels = series.labels()
    n_pairs = len(products) - 1
    out = {name: np.zeros(n_pairs) for name in metrics}
    similarity = None
    if "quadratic" in metrics:
        similarity = gaussian_similarity(products[0].distribution.quantization, config.sigma_a)
    for t in range(n_pairs):
        pa, pb = products[t], products[t + 1]
        da, db = pa.distribution, pb.distribution
        pair_flags = pa.singular.flags | pb.singular.flags
        if "d1" in out:
            out["d1"][t] = dq(da, db, 1.0)
        if "d2" in out:
            out["d2"][t] = dq(da, db, 2.0)
        if "dinf" in out:
            out["dinf"][t] = dq(da, db, math.inf)
        if "dqS" in out:
            out["dqS"][t] = dq_singular(da, db, pair_flags, config.q, config.omega)
        if "minkowski" in out:
            out["minkowski"][t] = minkowski(da, db, config.minkowski_r)
        if "intersection" in out:
            out["intersection"][t] = hist_intersection(da, db)
        if "kl" in out:
            out["kl"][t] = kl_divergence(da, db, config.kl_epsilon)
        if "quadratic" in out:
            out["quadratic"][t] = quadratic_form(da, db, similarity)
        if "rms" in out:
            out["rms"][t] = rms_multifield(series.frames[t], series.frames[t + 1])
    pairs = [(labels[t], labels[t + 1]) for t in range(n_pairs)]
    return DistanceSeries(site_pairs=pairs, values=out)


def compute_distance_series(
    series: FrameSeries,
    config: DistanceConfig = DistanceConfig(),
    metrics=ALL_METRICS,
    slab_widths=None,
    bin_counts=None,
    tau: float = DEFAULT_TAU,
    mode: str = "count",
    backend: str | None = None,
) -> DistanceSeries:
    """Full pipeline: quantize, extract, flag singular bins, distribute, compare."""
    _, products = series_products(
        series,
        slab_widths=slab_widths,
        bin_counts=bin_counts,
        tau=tau,
        mode=mode,
        backend=backend,
    )
    return distance_series_from_products(series, products, config, metrics)
