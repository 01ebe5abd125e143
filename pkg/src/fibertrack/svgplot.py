"""Self-contained SVG line charts for distance series; no plotting library."""

from __future__ import annotations

from pathlib import Path

from .metrics import DistanceSeries

__all__ = ["emit_svg_plot"]

WIDTH = 800
HEIGHT = 480
MARGIN_L = 64
MARGIN_R = 16
MARGIN_T = 18
MARGIN_B = 44

PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#7f7f7f",
    "#bcbd22",
)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def emit_svg_plot(series: DistanceSeries, metrics, path) -> Path:
    """Write one polyline per metric against pair index; y spans [0, 1.05*max]."""
    metrics = list(metrics)
    if not metrics:
        raise ValueError("no metrics selected for plotting")
    for name in metrics:
        if name not in series.values:
            raise KeyError(f"metric {name!r} not present in the series")
    n = len(series.site_pairs)
    if n == 0:
        raise ValueError("empty distance series")

    ymax = max(max(series.values[m]) for m in metrics)
    ymax = 1.05 * ymax if ymax > 0 else 1.0
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B

    def sx(i: int) -> float:
        return MARGIN_L + (plot_w * i / max(n - 1, 1))

    def sy(v: float) -> float:
        return MARGIN_T + plot_h * (1.0 - v / ymax)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" '
        f'width="{WIDTH}" height="{HEIGHT}">',
        f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T}" x2="{MARGIN_L}" '
        f'y2="{MARGIN_T + plot_h}" stroke="black"/>',
        f'<line x1="{MARGIN_L}" y1="{MARGIN_T + plot_h}" x2="{MARGIN_L + plot_w}" '
        f'y2="{MARGIN_T + plot_h}" stroke="black"/>',
    ]

    # y ticks
    for j in range(6):
        v = ymax * j / 5
        y = sy(v)
        parts.append(
            f'<line x1="{MARGIN_L - 4}" y1="{_fmt(y)}" x2="{MARGIN_L}" '
            f'y2="{_fmt(y)}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{MARGIN_L - 8}" y="{_fmt(y + 4)}" text-anchor="end" '
            f'font-size="11">{_fmt(v)}</text>'
        )
    # x ticks: at most ~12 labels
    stride = max(1, (n + 11) // 12)
    for i in range(0, n, stride):
        x = sx(i)
        a, b = series.site_pairs[i]
        parts.append(
            f'<line x1="{_fmt(x)}" y1="{MARGIN_T + plot_h}" x2="{_fmt(x)}" '
            f'y2="{MARGIN_T + plot_h + 4}" stroke="black"/>'
        )
        parts.append(
            f'<text x="{_fmt(x)}" y="{MARGIN_T + plot_h + 18}" text-anchor="middle" '
            f'font-size="11">{a}-{b}</text>'
        )
    parts.append(
        f'<text x="{MARGIN_L + plot_w / 2}" y="{HEIGHT - 8}" text-anchor="middle" '
        f'font-size="12">consecutive site pair</text>'
    )

    for mi, name in enumerate(metrics):
        color = PALETTE[mi % len(PALETTE)]
        pts = " ".join(
            f"{_fmt(sx(i))},{_fmt(sy(float(v)))}"
            for i, v in enumerate(series.values[name])
        )
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
        )
        ly = MARGIN_T + 14 + 16 * mi
        lx = MARGIN_L + plot_w - 120
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}" '
            f'stroke="{color}" stroke-width="2"/>'
        )
        parts.append(f'<text x="{lx + 30}" y="{ly}" font-size="12">{name}</text>')

    parts.append("</svg>")
    path = Path(path)
    path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return path
