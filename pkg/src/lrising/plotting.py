"""Minimal standalone SVG line charts (no plotting dependency)."""

from __future__ import annotations

import math

import numpy as np

_COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")


def line_chart_svg(x, series: dict, *, title: str = "", xlabel: str = "t", ylabel: str = "",
                   logx: bool = False, width: int = 640, height: int = 400) -> str:
    x = np.asarray(x, dtype=np.float64)
    xs = np.log10(x) if logx else x
    ys = [np.asarray(v, dtype=np.float64) for v in series.values()]
    x0, x1 = float(xs.min()), float(xs.max())
    y0 = min(float(v.min()) for v in ys)
    y1 = max(float(v.max()) for v in ys)
    if y1 == y0:
        y1 = y0 + 1.0
    if x1 == x0:
        x1 = x0 + 1.0
    ml, mr, mt, mb = 60, 20, 30, 45
    pw, ph = width - ml - mr, height - mt - mb

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + (1.0 - (v - y0) / (y1 - y0)) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>',
        f'<text x="{width / 2}" y="18" text-anchor="middle" font-size="13">{title}</text>',
        f'<text x="{ml + pw / 2}" y="{height - 8}" text-anchor="middle">{xlabel}</text>',
        f'<text x="14" y="{mt + ph / 2}" transform="rotate(-90 14 {mt + ph / 2})" text-anchor="middle">{ylabel}</text>',
    ]
    for k in range(5):
        yv = y0 + k * (y1 - y0) / 4
        out.append(f'<text x="{ml - 5}" y="{py(yv) + 4:.1f}" text-anchor="end">{yv:.3g}</text>')
        xv = x0 + k * (x1 - x0) / 4
        label = f"{10 ** xv:.3g}" if logx else f"{xv:.3g}"
        out.append(f'<text x="{px(xv):.1f}" y="{mt + ph + 15}" text-anchor="middle">{label}</text>')
    for i, (name, y) in enumerate(zip(series, ys)):
        color = _COLORS[i % len(_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(xs, y) if math.isfinite(b))
        out.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{ml + pw - 5}" y="{mt + 14 + 13 * i}" text-anchor="end" fill="{color}">{name}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
