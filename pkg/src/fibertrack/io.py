"""Reading and writing frame series in the MFG on-disk layout.

A series is a UTF-8 JSON manifest plus one headerless raw file per field per
frame.  Raw files hold exactly nx*ny*nz IEEE-754 binary64 little-endian values
in x-fastest order; they are read and written bit-exactly.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import numpy as np

from .model import FrameSeries, GridDomain, MultifieldFrame, ScalarField

__all__ = ["load_series", "save_series"]


def _read_raw(path: Path, n_values: int) -> np.ndarray:
    if not path.is_file():
        raise FileNotFoundError(f"raw file not found: {path}")
    size = os.path.getsize(path)
    expected = 8 * n_values
    if size != expected:
        raise ValueError(
            f"truncated or oversized raw file {path}: {size} bytes, expected {expected}"
        )
    return np.fromfile(path, dtype="<f8")


def load_series(manifest_path) -> FrameSeries:
    """Load a series manifest and all referenced raw field files."""
    manifest_path = Path(manifest_path)
    if not manifest_path.is_file():
        raise FileNotFoundError(f"manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)

    for key in ("dims", "spacing", "fields", "frames"):
        if key not in manifest:
            raise ValueError(f"manifest missing required key {key!r}")

    dims = tuple(int(d) for d in manifest["dims"])
    spacing = tuple(float(s) for s in manifest["spacing"])
    field_names = [str(n) for n in manifest["fields"]]
    base = manifest_path.parent

    frames = []
    sites = []
    for t, entry in enumerate(manifest["frames"]):
        origin = tuple(float(x) for x in entry["origin"])
        grid = GridDomain(dims=dims, origin=origin, spacing=spacing)
        data = entry["data"]
        if sorted(data.keys()) != sorted(field_names):
            raise ValueError(
                f"frame {t}: field-count/name mismatch: manifest fields {field_names}, "
                f"frame data {sorted(data.keys())}"
            )
        fields = []
        for name in field_names:
            values = _read_raw(base / data[name], grid.n_vertices)
            fields.append(ScalarField(name=name, values=values))
        frames.append(MultifieldFrame(grid=grid, fields=tuple(fields), time_index=t))
        sites.append(int(entry.get("site", t)))

    meta = {}
    meta_path = base / "meta.json"
    if meta_path.is_file():
        with open(meta_path, encoding="utf-8") as fh:
            meta = json.load(fh)
    return FrameSeries(frames=tuple(frames), site_labels=tuple(sites), metadata=meta)


def save_series(series: FrameSeries, out_dir, manifest_name: str = "series.json") -> Path:
    """Write a series as manifest + raw files; round-trips bit-exactly."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    first = series.frames[0]
    manifest = {
        "dims": list(first.grid.dims),
        "spacing": list(first.grid.spacing),
        "fields": list(series.field_names),
        "frames": [],
    }
    labels = series.labels()
    for t, frame in enumerate(series.frames):
        data = {}
        for fld in frame.fields:
            rel = f"site{labels[t]:04d}_{fld.name}.raw"
            fld.values.astype("<f8").tofile(out_dir / rel)
            data[fld.name] = rel
        manifest["frames"].append(
            {"site": labels[t], "origin": list(frame.grid.origin), "data": data}
        )
    manifest_path = out_dir / manifest_name
    with open(manifest_path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    if series.metadata:
        with open(out_dir / "meta.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(series.metadata, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return manifest_path
