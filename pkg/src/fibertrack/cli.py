"""Command line front end: generate series, dump histograms and singular
elements, and compare consecutive frames with the distance metrics.

Exit codes: 0 success, 1 pipeline error (diagnostic on stderr), 2 bad flags.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import backend as _backend
from .datagen import SyntheticSpec, generate
from .extract import extract_fiber_components
from .io import load_series, save_series
from .jacobi import mark_singular_elements, project_singular_bins
from .metrics import (
    ALL_METRICS,
    DistanceConfig,
    compute_distance_series,
)
from .quantize import build_quantization
from .svgplot import emit_svg_plot

__all__ = ["main", "build_parser"]


def _triple(text: str, cast=float):
    parts = [cast(p) for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"expected 3 comma-separated values, got {text!r}")
    return tuple(parts)


def _floats(text: str):
    return [float(p) for p in text.split(",")]


def _ints(text: str):
    return [int(p) for p in text.split(",")]


def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _parse_frame_ref(ref: str):
    if "#" not in ref:
        raise ValueError(f"frame reference must look like manifest.json#site, got {ref!r}")
    path, _, site = ref.rpartition("#")
    return Path(path), int(site)


def _quant_args(parser: argparse.ArgumentParser):
    parser.add_argument("--slab-widths", type=_floats, default=None,
                        help="per-field bin widths, comma separated")
    parser.add_argument("--bin-counts", type=_ints, default=None,
                        help="per-field bin counts, comma separated (default 16 per field)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fibertrack",
        description="Topological event detection in time-varying multifield data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_gen = sub.add_parser("gen", help="generate a synthetic series")
    p_gen.add_argument("--kind", choices=["translated-paraboloid", "separating-blobs"],
                       required=True)
    p_gen.add_argument("--out", required=True, help="output directory")
    p_gen.add_argument("--dims", type=lambda s: _triple(s, int), default=(20, 20, 20))
    p_gen.add_argument("--step", type=float, default=0.05)
    p_gen.add_argument("--n-sites", type=int, default=None,
                       help="default: 21 for translated-paraboloid, 11 for separating-blobs")
    p_gen.add_argument("--sigma", type=float, default=1.0)
    p_gen.add_argument("--center1-start", type=_triple, default=(0.0, 0.0, 0.0))
    p_gen.add_argument("--center1-end", type=_triple, default=(-2.5, 0.0, 0.0))
    p_gen.add_argument("--center2-start", type=_triple, default=(0.0, 0.0, 0.0))
    p_gen.add_argument("--center2-end", type=_triple, default=(2.5, 0.0, 0.0))
    p_gen.add_argument("--box", type=lambda s: tuple(_floats(s)), default=(-4.0, 4.0),
                       help="cubic domain bounds lo,hi (separating-blobs only)")

    p_hist = sub.add_parser("histogram", help="fiber-component histogram of one frame")
    p_hist.add_argument("--frame", required=True, help="manifest.json#site")
    _quant_args(p_hist)
    p_hist.add_argument("--tau", type=float, default=1e-6)
    p_hist.add_argument("--out", required=True)

    p_jac = sub.add_parser("jacobi", help="singular elements and singular bins of one frame")
    p_jac.add_argument("--frame", required=True, help="manifest.json#site")
    _quant_args(p_jac)
    p_jac.add_argument("--tau", type=float, default=1e-6)
    p_jac.add_argument("--out", required=True)

    p_cmp = sub.add_parser("compare", help="distance metrics between consecutive frames")
    p_cmp.add_argument("--series", required=True, help="series manifest path")
    p_cmp.add_argument("--fields", type=lambda s: s.split(","), default=None,
                       help="field subset, comma separated names")
    _quant_args(p_cmp)
    p_cmp.add_argument("--q", type=float, default=1.0)
    p_cmp.add_argument("--omega", type=float, default=13.0)
    p_cmp.add_argument("--tau", type=float, default=1e-6)
    p_cmp.add_argument("--epsilon", type=float, default=1e-9, help="KL smoothing")
    p_cmp.add_argument("--sigma-a", type=float, default=1.0,
                       help="quadratic-form similarity bandwidth")
    p_cmp.add_argument("--minkowski-r", type=float, default=2.0)
    p_cmp.add_argument("--metrics", default="all",
                       help="'all' or comma separated subset of " + ",".join(ALL_METRICS))
    p_cmp.add_argument("--mode", choices=["count", "measure"], default="count")
    p_cmp.add_argument("--backend", choices=["compiled", "python"], default=None)
    p_cmp.add_argument("--out", required=True, help="distances CSV path")
    p_cmp.add_argument("--svg", default=None, help="optional SVG plot path")
    return parser


def _cmd_gen(args) -> int:
    n_sites = args.n_sites
    if n_sites is None:
        n_sites = 21 if args.kind == "translated-paraboloid" else 11
    spec = SyntheticSpec(
        kind=args.kind,
        dims=args.dims,
        step=args.step,
        n_sites=n_sites,
        sigma=args.sigma,
        center1_start=args.center1_start,
        center1_end=args.center1_end,
        center2_start=args.center2_start,
        center2_end=args.center2_end,
        box=args.box,
    )
    series = generate(spec)
    manifest = save_series(series, args.out)
    print(f"wrote {manifest} ({len(series.frames)} frames, fields: "
          f"{', '.join(series.field_names)})")
    return 0


def _load_frame(ref: str):
    manifest, site = _parse_frame_ref(ref)
    series = load_series(manifest)
    labels = series.labels()
    if site not in labels:
        raise ValueError(f"site {site} not in series sites {labels}")
    return series, series.frames[labels.index(site)]


def _build_quant(series, args, r):
    slab_widths = args.slab_widths
    bin_counts = args.bin_counts
    if slab_widths is None and bin_counts is None:
        bin_counts = [16] * r
    return build_quantization(series, slab_widths=slab_widths, bin_counts=bin_counts)


def _cmd_histogram(args) -> int:
    series, frame = _load_frame(args.frame)
    quant = _build_quant(series, args, frame.r)
    hist = extract_fiber_components(frame, quant)
    jset = mark_singular_elements(frame, args.tau)
    sbins = project_singular_bins(jset, frame, quant)
    hist.set_singular(sbins.flags)
    r = quant.n_fields
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        head_i = ",".join(f"i{k + 1}" for k in range(r))
        head_lo = ",".join(f"lo{k + 1}" for k in range(r))
        fh.write(f"{head_i},{head_lo},count,measure,singular\n")
        for idx in hist.occupied_bins():
            box = quant.bin_box(idx)
            cells = [str(i) for i in idx]
            cells += [_fmt(lo) for lo, _ in box]
            cells.append(str(int(hist.counts[idx])))
            cells.append(_fmt(float(hist.measures[idx])))
            cells.append(str(int(hist.singular[idx])))
            fh.write(",".join(cells) + "\n")
    print(f"wrote {args.out} ({len(hist.occupied_bins())} occupied bins)")
    return 0


def _cmd_jacobi(args) -> int:
    series, frame = _load_frame(args.frame)
    quant = _build_quant(series, args, frame.r)
    jset = mark_singular_elements(frame, args.tau)
    sbins = project_singular_bins(jset, frame, quant)
    r = quant.n_fields
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        head_i = ",".join(f"i{k + 1}" for k in range(r))
        fh.write(f"kind,id,{head_i}\n")
        for t in jset.singular_tets:
            fh.write(f"tet,{int(t)},{',' * (r - 1)}\n")
        for t in jset.singular_boundary_tris:
            fh.write(f"tri,{int(t)},{',' * (r - 1)}\n")
        for idx in sorted(sbins.indices()):
            fh.write(f"bin,,{','.join(str(i) for i in idx)}\n")
    print(
        f"wrote {args.out} ({jset.singular_tets.size} tets, "
        f"{jset.singular_boundary_tris.size} boundary tris, "
        f"{len(sbins.indices())} singular bins)"
    )
    return 0


def _cmd_compare(args) -> int:
    series = load_series(args.series)
    if args.fields:
        series = series.select_fields(args.fields)
    if args.metrics == "all":
        metrics = list(ALL_METRICS)
    else:
        metrics = [m for m in args.metrics.split(",") if m]
        unknown = set(metrics) - set(ALL_METRICS)
        if unknown:
            raise ValueError(f"unknown metrics: {sorted(unknown)}")
    config = DistanceConfig(
        q=args.q,
        omega=args.omega,
        kl_epsilon=args.epsilon,
        sigma_a=args.sigma_a,
        minkowski_r=args.minkowski_r,
    )
    result = compute_distance_series(
        series,
        config=config,
        metrics=metrics,
        slab_widths=args.slab_widths,
        bin_counts=args.bin_counts,
        tau=args.tau,
        mode=args.mode,
        backend=args.backend,
    )
    columns = ["d1", "d2", "dinf", "dqS", "minkowski_r", "intersection", "kl",
               "quadratic", "rms"]
    by_column = {"minkowski_r": "minkowski"}
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pair,site_a,site_b," + ",".join(columns) + "\n")
        for t, (sa, sb) in enumerate(result.site_pairs):
            cells = [str(t), str(sa), str(sb)]
            for col in columns:
                name = by_column.get(col, col)
                cells.append(_fmt(float(result.values[name][t])) if name in result.values else "")
            fh.write(",".join(cells) + "\n")
    if args.svg:
        emit_svg_plot(result, metrics=[m for m in metrics if m in result.values], path=args.svg)
    print(f"wrote {args.out} ({len(result.site_pairs)} pairs, backend: "
          f"{_backend.get_backend(args.backend).BACKEND_NAME})")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "gen": _cmd_gen,
        "histogram": _cmd_histogram,
        "jacobi": _cmd_jacobi,
        "compare": _cmd_compare,
    }
    try:
        return handlers[args.command](args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
