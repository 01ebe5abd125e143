import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from fibertrack.datagen import SyntheticSpec, gen_separating_blobs, gen_translated_paraboloid
from fibertrack.metrics import series_products
from fibertrack.model import GridDomain, MultifieldFrame, ScalarField

# quantization used for the full-scale demo runs in the acceptance suite
PARABOLOID_SLAB_WIDTHS = (0.5, 0.5)
BLOB_SLAB_WIDTHS = (0.25, 2.0)


@pytest.fixture(scope="session")
def paraboloid_series():
    return gen_translated_paraboloid(SyntheticSpec())


@pytest.fixture(scope="session")
def paraboloid_products(paraboloid_series):
    return series_products(paraboloid_series, slab_widths=PARABOLOID_SLAB_WIDTHS)


@pytest.fixture(scope="session")
def blob_series():
    return gen_separating_blobs(SyntheticSpec(kind="separating-blobs", n_sites=11))


@pytest.fixture(scope="session")
def blob_products(blob_series):
    return series_products(blob_series, slab_widths=BLOB_SLAB_WIDTHS)


def make_frame(dims, origin, spacing, field_funcs, time_index=0):
    """Frame with fields sampled from world-coordinate functions."""
    grid = GridDomain(dims, origin, spacing)
    coords = grid.vertex_coords()
    fields = tuple(
        ScalarField(name, np.ascontiguousarray(fn(coords[:, 0], coords[:, 1], coords[:, 2])))
        for name, fn in field_funcs
    )
    return MultifieldFrame(grid, fields, time_index)


@pytest.fixture
def gauss_blob_frame():
    """Single Gaussian bump plus height on a 10^3 grid."""
    return make_frame(
        (10, 10, 10),
        (-2.0, -2.0, -2.0),
        (4 / 9, 4 / 9, 4 / 9),
        [
            ("bump", lambda x, y, z: np.exp(-(x**2 + y**2 + z**2))),
            ("height", lambda x, y, z: z + 0.0),
        ],
    )


@pytest.fixture
def two_blob_frame():
    """Split pair of Gaussian bumps plus height on a 10^3 grid."""
    s2 = 0.7**2
    return make_frame(
        (10, 10, 10),
        (-2.0, -2.0, -2.0),
        (4 / 9, 4 / 9, 4 / 9),
        [
            (
                "bumps",
                lambda x, y, z: np.exp(-((x - 1.2) ** 2 + y**2 + z**2) / s2)
                + np.exp(-((x + 1.2) ** 2 + y**2 + z**2) / s2),
            ),
            ("height", lambda x, y, z: z + 0.0),
        ],
    )


@pytest.fixture
def constant_frame():
    return make_frame(
        (7, 7, 7),
        (0.0, 0.0, 0.0),
        (0.5, 0.5, 0.5),
        [
            ("a", lambda x, y, z: np.full_like(x, 0.3)),
            ("b", lambda x, y, z: np.full_like(x, 0.7)),
        ],
    )
