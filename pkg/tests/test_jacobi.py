import numpy as np
import pytest

from fibertrack.jacobi import mark_singular_elements, project_singular_bins
from fibertrack.model import (
    FrameSeries,
    MultifieldFrame,
    ScalarField,
    mesh_connectivity,
)
from fibertrack.quantize import build_quantization

from conftest import make_frame
from oracles import line_hits_tet_xy


def bivariate(f2, dims=(8, 8, 8), origin=(-2.0, -2.0, -2.0), spacing=None):
    if spacing is None:
        s = 4 / (dims[0] - 1)
        spacing = (s, s, s)
    return make_frame(
        dims, origin, spacing,
        [("height", lambda x, y, z: z + 0.0), ("other", f2)],
    )


def test_orthogonal_fields_have_no_singular_tets():
    frame = bivariate(lambda x, y, z: x + 0.0)
    jset = mark_singular_elements(frame, 1e-6)
    assert jset.singular_tets.size == 0


def test_parallel_fields_are_singular_everywhere():
    frame = bivariate(lambda x, y, z: 2 * z + 1)
    jset = mark_singular_elements(frame, 1e-6)
    n_tets = mesh_connectivity(frame.grid.dims).tets.shape[0]
    assert jset.singular_tets.size == n_tets
    assert jset.singular_boundary_tris.size == mesh_connectivity(frame.grid.dims).boundary_facet_verts.shape[0]


def test_height_paraboloid_singular_set_is_axis_column(paraboloid_series):
    # at the symmetric site the detected tets are exactly those meeting the
    # vertical axis where the field gradients align
    frame = paraboloid_series.frames[10]
    jset = mark_singular_elements(frame, 1e-6)
    mesh = mesh_connectivity(frame.grid.dims)
    proj = frame.grid.vertex_coords()[mesh.tets][:, :, :2]
    truth = np.array([line_hits_tet_xy(proj[t]) for t in range(proj.shape[0])])
    assert np.array_equal(np.sort(jset.singular_tets), np.flatnonzero(truth))
    assert jset.singular_tets.size > 0


def test_off_symmetric_site_has_no_interior_singular_tets(paraboloid_series):
    jset = mark_singular_elements(paraboloid_series.frames[3], 1e-6)
    assert jset.singular_tets.size == 0


def test_scale_covariance():
    frame = bivariate(lambda x, y, z: x**2 + y**2 - z, dims=(10, 10, 10),
                      origin=(-5.0, -5.0, -5.0), spacing=(10 / 9, 10 / 9, 10 / 9))
    jset = mark_singular_elements(frame, 1e-4)
    scaled = MultifieldFrame(
        frame.grid,
        (frame.fields[0], ScalarField("other", 250.0 * frame.fields[1].values)),
    )
    jset_scaled = mark_singular_elements(scaled, 1e-4)
    assert np.array_equal(jset.singular_tets, jset_scaled.singular_tets)
    assert np.array_equal(jset.singular_boundary_tris, jset_scaled.singular_boundary_tris)


def test_monotone_in_tau():
    frame = bivariate(lambda x, y, z: x**2 + y**2 - z, dims=(10, 10, 10),
                      origin=(-5.0, -5.0, -5.0), spacing=(10 / 9, 10 / 9, 10 / 9))
    taus = (1e-8, 1e-4, 1e-1)
    sets = [set(mark_singular_elements(frame, t).singular_tets.tolist()) for t in taus]
    assert sets[0] <= sets[1] <= sets[2]


def test_vanishing_gradient_marks_singular():
    frame = bivariate(lambda x, y, z: np.full_like(x, 2.5))
    jset = mark_singular_elements(frame, 1e-6)
    n_tets = mesh_connectivity(frame.grid.dims).tets.shape[0]
    assert jset.singular_tets.size == n_tets


def test_r1_height_field_regular():
    frame = make_frame((6, 6, 6), (0, 0, 0), (1, 1, 1), [("h", lambda x, y, z: z + 0.0)])
    jset = mark_singular_elements(frame, 1e-6)
    # interior gradient never vanishes; top and bottom boundary faces do
    assert jset.singular_tets.size == 0
    assert jset.singular_boundary_tris.size == 2 * 2 * 5 * 5


def test_arity_limit():
    frame = make_frame(
        (4, 4, 4), (0, 0, 0), (1, 1, 1),
        [(n, (lambda c: lambda x, y, z: x + c)(i)) for i, n in enumerate("abcd")],
    )
    with pytest.raises(ValueError, match="arity"):
        mark_singular_elements(frame, 1e-6)


def test_tau_must_be_positive():
    frame = bivariate(lambda x, y, z: x + 0.0)
    with pytest.raises(ValueError):
        mark_singular_elements(frame, 0.0)


def quant_for(frame, counts):
    series = FrameSeries((frame, MultifieldFrame(frame.grid, frame.fields, 1)))
    return build_quantization(series, bin_counts=counts)


def test_empty_projection():
    frame = bivariate(lambda x, y, z: x + 0.0)
    quant = quant_for(frame, [4, 4])
    jset = mark_singular_elements(frame, 1e-6)
    jset_none = type(jset)(
        singular_tets=np.empty(0, dtype=np.int64),
        singular_boundary_tris=np.empty(0, dtype=np.int64),
        tau=jset.tau,
    )
    sbins = project_singular_bins(jset_none, frame, quant)
    assert not sbins.flags.any()
    assert sbins.indices() == set()


def test_all_singular_projects_to_every_occupied_bin():
    from fibertrack.extract import extract_fiber_components

    frame = bivariate(lambda x, y, z: 2 * z + 1)
    quant = quant_for(frame, [5, 5])
    jset = mark_singular_elements(frame, 1e-6)
    sbins = project_singular_bins(jset, frame, quant)
    hist = extract_fiber_components(frame, quant)
    assert (sbins.flags[hist.counts > 0]).all()


def test_projection_matches_direct_range_evaluation(paraboloid_series):
    frame = paraboloid_series.frames[10]
    quant = build_quantization(paraboloid_series, slab_widths=[0.5, 0.5])
    jset = mark_singular_elements(frame, 1e-6)
    sbins = project_singular_bins(jset, frame, quant)

    mesh = mesh_connectivity(frame.grid.dims)
    values = frame.values_matrix()
    expected = np.zeros(quant.shape, dtype=bool)
    for kind, ids, verts in (
        ("tet", jset.singular_tets, mesh.tets),
        ("tri", jset.singular_boundary_tris, mesh.boundary_facet_verts),
    ):
        for t in ids:
            tv = values[verts[t]]
            slices = []
            for k in range(2):
                e = quant.edges[k]
                lo = max(0, int(np.searchsorted(e, tv[:, k].min(), side="left")) - 1)
                hi = min(len(e) - 2, int(np.searchsorted(e, tv[:, k].max(), side="right")) - 1)
                slices.append(slice(lo, hi + 1))
            expected[tuple(slices)] = True
    assert np.array_equal(sbins.flags, expected)
    # singular bins hug the gradient-alignment curve: a small occupied subset
    assert 0 < sbins.flags.sum() < expected.size // 4


def test_projection_requires_matching_quantization(gauss_blob_frame):
    frame = gauss_blob_frame
    jset = mark_singular_elements(frame, 1e-6)
    bad = build_quantization(
        FrameSeries((frame.select_fields(["bump"]), frame.select_fields(["bump"]))),
        bin_counts=[4],
    )
    with pytest.raises(ValueError):
        project_singular_bins(jset, frame, bad)
