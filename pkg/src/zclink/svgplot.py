"""Minimal static SVG line charts, emitted without plotting dependencies.

The CSV files are the authoritative artifacts; these charts exist so runs
can be eyeballed without further tooling.  Output bytes are a pure function
of the data.
"""

from __future__ import annotations

import math

_PALETTE = ("#c22", "#26a", "#282", "#a2a", "#b80", "#088")

_WIDTH, _HEIGHT = 720, 460
_ML, _MR, _MT, _MB = 70, 20, 30, 55


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _log_ticks(lo: float, hi: float) -> list[float]:
    lo_e = math.floor(math.log10(lo))
    hi_e = math.ceil(math.log10(hi))
    return [10.0**e for e in range(lo_e, hi_e + 1)]


def _lin_ticks(lo: float, hi: float, n: int = 6) -> list[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10.0 ** math.floor(math.log10(raw))
    step = min(s * mag for s in (1, 2, 5, 10) if s * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-12 * step:
        ticks.append(round(t, 12))
        t += step
    return ticks


def line_chart(
    series: list[tuple[str, list[float], list[float]]],
    x_label: str,
    y_label: str,
    title: str = "",
    log_x: bool = False,
    log_y: bool = False,
) -> str:
    """Render labelled polylines to an SVG document string.

    On log axes, points at or below zero are dropped from the polyline but
    keep their place in the legend.
    """
    xs_all, ys_all = [], []
    for _, xs, ys in series:
        for x, y in zip(xs, ys):
            if (not log_x or x > 0) and (not log_y or y > 0):
                xs_all.append(x)
                ys_all.append(y)
    if not xs_all:
        xs_all = [0.1, 1.0] if log_x else [0.0, 1.0]
        ys_all = [0.1, 1.0] if log_y else [0.0, 1.0]

    def expand(lo, hi, log):
        if log:
            return lo / 1.3, hi * 1.3
        pad = 0.05 * (hi - lo) or 1.0
        return lo - pad, hi + pad

    x_lo, x_hi = expand(min(xs_all), max(xs_all), log_x)
    y_lo, y_hi = expand(min(ys_all), max(ys_all), log_y)

    def sx(x):
        if log_x:
            f = (math.log10(x) - math.log10(x_lo)) / (math.log10(x_hi) - math.log10(x_lo))
        else:
            f = (x - x_lo) / (x_hi - x_lo)
        return _ML + f * (_WIDTH - _ML - _MR)

    def sy(y):
        if log_y:
            f = (math.log10(y) - math.log10(y_lo)) / (math.log10(y_hi) - math.log10(y_lo))
        else:
            f = (y - y_lo) / (y_hi - y_lo)
        return _HEIGHT - _MB - f * (_HEIGHT - _MT - _MB)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="monospace" font-size="11">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="18" text-anchor="middle" font-size="13">{title}</text>'
        )

    x_ticks = _log_ticks(x_lo, x_hi) if log_x else _lin_ticks(x_lo, x_hi)
    y_ticks = _log_ticks(y_lo, y_hi) if log_y else _lin_ticks(y_lo, y_hi)
    for t in x_ticks:
        if not x_lo <= t <= x_hi:
            continue
        px = sx(t)
        parts.append(
            f'<line x1="{px:.1f}" y1="{_MT}" x2="{px:.1f}" y2="{_HEIGHT - _MB}" '
            f'stroke="#ddd" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{px:.1f}" y="{_HEIGHT - _MB + 16}" text-anchor="middle">{_fmt(t)}</text>'
        )
    for t in y_ticks:
        if not y_lo <= t <= y_hi:
            continue
        py = sy(t)
        parts.append(
            f'<line x1="{_ML}" y1="{py:.1f}" x2="{_WIDTH - _MR}" y2="{py:.1f}" '
            f'stroke="#ddd" stroke-width="1"/>'
        )
        label = f"1e{int(round(math.log10(t)))}" if log_y else _fmt(t)
        parts.append(
            f'<text x="{_ML - 6}" y="{py + 4:.1f}" text-anchor="end">{label}</text>'
        )

    parts.append(
        f'<rect x="{_ML}" y="{_MT}" width="{_WIDTH - _ML - _MR}" '
        f'height="{_HEIGHT - _MT - _MB}" fill="none" stroke="#333"/>'
    )
    parts.append(
        f'<text x="{(_ML + _WIDTH - _MR) / 2:.1f}" y="{_HEIGHT - 12}" '
        f'text-anchor="middle">{x_label}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_MT + _HEIGHT - _MB) / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_MT + _HEIGHT - _MB) / 2:.1f})">{y_label}</text>'
    )

    for i, (label, xs, ys) in enumerate(series):
        color = _PALETTE[i % len(_PALETTE)]
        pts = [
            f"{sx(x):.1f},{sy(y):.1f}"
            for x, y in zip(xs, ys)
            if (not log_x or x > 0) and (not log_y or y > 0)
        ]
        if pts:
            parts.append(
                f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" '
                f'stroke-width="1.8"/>'
            )
        ly = _MT + 16 + 15 * i
        parts.append(
            f'<line x1="{_WIDTH - _MR - 150}" y1="{ly - 4}" x2="{_WIDTH - _MR - 125}" '
            f'y2="{ly - 4}" stroke="{color}" stroke-width="1.8"/>'
        )
        parts.append(f'<text x="{_WIDTH - _MR - 120}" y="{ly}">{label}</text>')

    parts.append("</svg>")
    return "\n".join(parts) + "\n"
