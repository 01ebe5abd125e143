import json

import numpy as np
import pytest

from fibertrack.datagen import SyntheticSpec, gen_translated_paraboloid
from fibertrack.io import load_series, save_series


@pytest.fixture
def small_series():
    return gen_translated_paraboloid(SyntheticSpec(dims=(5, 5, 5), n_sites=3))


def test_round_trip_bit_exact(small_series, tmp_path):
    manifest = save_series(small_series, tmp_path)
    loaded = load_series(manifest)
    assert len(loaded.frames) == len(small_series.frames)
    assert loaded.field_names == small_series.field_names
    for a, b in zip(loaded.frames, small_series.frames):
        assert a.grid == b.grid
        for fa, fb in zip(a.fields, b.fields):
            assert np.array_equal(fa.values, fb.values)  # bit-identical
    assert loaded.site_labels == small_series.labels()


def test_metadata_round_trip(tmp_path, small_series):
    series = type(small_series)(
        frames=small_series.frames,
        site_labels=small_series.site_labels,
        metadata={"split_site": 7},
    )
    save_series(series, tmp_path)
    loaded = load_series(tmp_path / "series.json")
    assert loaded.metadata["split_site"] == 7


def test_missing_raw_file(tmp_path, small_series):
    manifest = save_series(small_series, tmp_path)
    (tmp_path / "site0001_height.raw").unlink()
    with pytest.raises(FileNotFoundError):
        load_series(manifest)


def test_truncated_raw_file(tmp_path, small_series):
    manifest = save_series(small_series, tmp_path)
    path = tmp_path / "site0001_height.raw"
    data = path.read_bytes()
    path.write_bytes(data[:-8])  # one value short
    with pytest.raises(ValueError, match="truncated"):
        load_series(manifest)


def test_single_frame_manifest_rejected(tmp_path, small_series):
    manifest = save_series(small_series, tmp_path)
    doc = json.loads(manifest.read_text())
    doc["frames"] = doc["frames"][:1]
    manifest.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="2 frames"):
        load_series(manifest)


def test_field_mismatch_rejected(tmp_path, small_series):
    manifest = save_series(small_series, tmp_path)
    doc = json.loads(manifest.read_text())
    del doc["frames"][1]["data"]["height"]
    manifest.write_text(json.dumps(doc))
    with pytest.raises(ValueError, match="mismatch"):
        load_series(manifest)


def test_nonfinite_values_rejected(tmp_path, small_series):
    manifest = save_series(small_series, tmp_path)
    path = tmp_path / "site0000_height.raw"
    vals = np.fromfile(path, dtype="<f8")
    vals[3] = np.inf
    vals.astype("<f8").tofile(path)
    with pytest.raises(ValueError, match="non-finite"):
        load_series(manifest)


def test_missing_manifest():
    with pytest.raises(FileNotFoundError):
        load_series("/nonexistent/series.json")
