"""fibertrack: topological event detection in time-varying multifield data.

Pipeline: quantize the shared range space, extract per-bin fiber-component
counts and measures, flag singular bins from the gradient-rank test, turn
histograms into distributions, and compare consecutive frames with a family
of histogram distances including the singular-weighted one.
"""

from .backend import DEFAULT_BACKEND, available_backends, get_backend
from .distribution import FiberDistribution, align_distributions, to_distribution
from .extract import (
    FiberComponentHistogram,
    FragmentCell,
    clip_tet_by_bin,
    extract_fiber_components,
    facet_feasible,
)
from .io import load_series, save_series
from .jacobi import (
    JacobiElementSet,
    SingularBinSet,
    mark_singular_elements,
    project_singular_bins,
)
from .metrics import (
    DistanceConfig,
    DistanceSeries,
    SimilarityMatrix,
    check_metric_axioms,
    compute_distance_series,
    dq,
    dq_singular,
    hist_intersection,
    kl_divergence,
    minkowski,
    quadratic_form,
    rms_multifield,
)
from .model import (
    FrameSeries,
    GridDomain,
    MultifieldFrame,
    ScalarField,
    Tetrahedron,
    field_range_box,
    tetrahedralize,
)
from .quantize import RangeQuantization, build_quantization

__version__ = "0.1.0"
