"""Minimal static SVG line charts for study outputs.

Deliberately tiny: polylines with circle markers over a framed plot area,
decade ticks on log axes, 1-2-5 ticks on linear axes, and a legend block.
Output is a plain SVG string with no external references.
"""

from __future__ import annotations

import math

_PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd",
    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f",
)
_W, _H = 760, 480
_ML, _MR, _MT, _MB = 78, 24, 46, 58


def _fmt(v: float) -> str:
    if v != 0 and (abs(v) >= 1e4 or abs(v) < 1e-3):
        return f"{v:.0e}".replace("e-0", "e-").replace("e+0", "e")
    out = f"{v:.6g}"
    return out


def _linear_ticks(lo: float, hi: float, target: int = 5) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(t)
        t += step
    return ticks


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    ticks = [10.0 ** e for e in range(lo_e, hi_e + 1)]
    ticks = [t for t in ticks if lo / 1.0001 <= t <= hi * 1.0001]
    if len(ticks) < 2:
        return _linear_ticks(lo, hi)
    return ticks


def line_chart(series, title: str, xlabel: str, ylabel: str,
               xlog: bool = False, ylog: bool = False) -> str:
    """Render [(label, [(x, y), ...]), ...] as a framed SVG line chart."""
    pts = [(x, y) for _, data in series for x, y in data]
    if not pts:
        raise ValueError("line_chart needs at least one point")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    if xlog and min(xs) <= 0:
        xlog = False
    if ylog and min(ys) <= 0:
        ylog = False

    def span(vals, log):
        lo, hi = min(vals), max(vals)
        if log:
            if hi == lo:
                lo, hi = lo / 2, hi * 2
            pad = (hi / lo) ** 0.05
            return lo / pad, hi * pad
        if hi == lo:
            lo, hi = lo - 0.5, hi + 0.5
        pad = (hi - lo) * 0.05
        return lo - pad, hi + pad

    x_lo, x_hi = span(xs, xlog)
    y_lo, y_hi = span(ys, ylog)
    plot_w = _W - _ML - _MR
    plot_h = _H - _MT - _MB

    def sx(v):
        if xlog:
            f = (math.log(v) - math.log(x_lo)) / (math.log(x_hi) - math.log(x_lo))
        else:
            f = (v - x_lo) / (x_hi - x_lo)
        return _ML + f * plot_w

    def sy(v):
        if ylog:
            f = (math.log(v) - math.log(y_lo)) / (math.log(y_hi) - math.log(y_lo))
        else:
            f = (v - y_lo) / (y_hi - y_lo)
        return _MT + (1.0 - f) * plot_h

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="15" '
        f'font-weight="bold">{title}</text>',
        f'<rect x="{_ML}" y="{_MT}" width="{plot_w}" height="{plot_h}" '
        f'fill="none" stroke="#333"/>',
    ]

    x_ticks = _log_ticks(x_lo, x_hi) if xlog else _linear_ticks(x_lo, x_hi)
    for t in x_ticks:
        px = sx(t)
        parts.append(f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" '
                     f'y2="{_MT + plot_h}" stroke="#ddd"/>')
        parts.append(f'<text x="{px:.1f}" y="{_MT + plot_h + 16}" '
                     f'text-anchor="middle">{_fmt(t)}</text>')
    y_ticks = _log_ticks(y_lo, y_hi) if ylog else _linear_ticks(y_lo, y_hi)
    for t in y_ticks:
        py = sy(t)
        parts.append(f'<line x1="{_ML}" y1="{py:.1f}" x2="{_ML + plot_w}" '
                     f'y2="{py:.1f}" stroke="#ddd"/>')
        parts.append(f'<text x="{_ML - 6}" y="{py + 4:.1f}" '
                     f'text-anchor="end">{_fmt(t)}</text>')

    parts.append(f'<text x="{_ML + plot_w / 2}" y="{_H - 14}" '
                 f'text-anchor="middle">{xlabel}</text>')
    parts.append(f'<text x="20" y="{_MT + plot_h / 2}" text-anchor="middle" '
                 f'transform="rotate(-90 20 {_MT + plot_h / 2})">{ylabel}</text>')

    for idx, (label, data) in enumerate(series):
        color = _PALETTE[idx % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in data)
        parts.append(f'<polyline points="{coords}" fill="none" '
                     f'stroke="{color}" stroke-width="1.6"/>')
        for x, y in data:
            parts.append(f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="2.6" '
                         f'fill="{color}"/>')
        ly = _MT + 10 + 16 * idx
        parts.append(f'<line x1="{_ML + plot_w - 150}" y1="{ly}" '
                     f'x2="{_ML + plot_w - 126}" y2="{ly}" stroke="{color}" '
                     f'stroke-width="1.6"/>')
        parts.append(f'<text x="{_ML + plot_w - 120}" y="{ly + 4}">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts)
