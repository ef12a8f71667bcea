"""Minimal deterministic SVG charts.

Pure string assembly: fixed canvas, fixed palette, values formatted with
stable precision, so identical inputs yield byte-identical files. Only the
two shapes the reports need: multi-series line charts and grouped bar
charts.
"""
from __future__ import annotations

from typing import Sequence

from traitfusion.types import ValidationError

WIDTH = 640
HEIGHT = 400
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 64, 16, 36, 56
PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf")

_PLOT_W = WIDTH - MARGIN_L - MARGIN_R
_PLOT_H = HEIGHT - MARGIN_T - MARGIN_B


def _fmt(x: float) -> str:
    return f"{x:.2f}"


def _esc(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")


def _bounds(values: Sequence[float]) -> tuple[float, float]:
    lo, hi = min(values), max(values)
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    return lo - pad, hi + pad


def _header(title: str) -> list[str]:
    return [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>',
        f'<text x="{WIDTH / 2:.0f}" y="22" text-anchor="middle" font-size="15">{_esc(title)}</text>',
    ]


def _axes(xlabel: str, ylabel: str) -> list[str]:
    x0, y0 = MARGIN_L, MARGIN_T
    x1, y1 = WIDTH - MARGIN_R, HEIGHT - MARGIN_B
    return [
        f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}" stroke="#333333"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="#333333"/>',
        f'<text x="{(x0 + x1) / 2:.0f}" y="{HEIGHT - 10}" text-anchor="middle" font-size="12">{_esc(xlabel)}</text>',
        f'<text x="16" y="{(y0 + y1) / 2:.0f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {(y0 + y1) / 2:.0f})">{_esc(ylabel)}</text>',
    ]


def _y_ticks(lo: float, hi: float) -> list[str]:
    out = []
    for i in range(5):
        v = lo + (hi - lo) * i / 4
        y = HEIGHT - MARGIN_B - _PLOT_H * i / 4
        out.append(f'<line x1="{MARGIN_L - 4}" y1="{y:.2f}" x2="{MARGIN_L}" y2="{y:.2f}" stroke="#333333"/>')
        out.append(
            f'<text x="{MARGIN_L - 8}" y="{y + 4:.2f}" text-anchor="end" font-size="11">{v:.3g}</text>'
        )
    return out


def _legend(names: Sequence[str]) -> list[str]:
    out = []
    for i, name in enumerate(names):
        x = MARGIN_L + 8
        y = MARGIN_T + 14 + 16 * i
        color = PALETTE[i % len(PALETTE)]
        out.append(f'<rect x="{x}" y="{y - 9}" width="10" height="10" fill="{color}"/>')
        out.append(f'<text x="{x + 14}" y="{y}" font-size="11">{_esc(name)}</text>')
    return out


def line_chart(
    title: str,
    xlabel: str,
    ylabel: str,
    series: Sequence[tuple[str, Sequence[float], Sequence[float]]],
) -> str:
    """Multi-series line chart; each series is (name, xs, ys)."""
    if not series:
        raise ValidationError("line_chart needs at least one series")
    all_x = [x for _, xs, _ in series for x in xs]
    all_y = [y for _, _, ys in series for y in ys]
    if not all_x:
        raise ValidationError("line_chart series are empty")
    x_lo, x_hi = _bounds(all_x)
    y_lo, y_hi = _bounds(all_y)

    def px(x: float) -> float:
        return MARGIN_L + _PLOT_W * (x - x_lo) / (x_hi - x_lo)

    def py(y: float) -> float:
        return HEIGHT - MARGIN_B - _PLOT_H * (y - y_lo) / (y_hi - y_lo)

    parts = _header(title) + _axes(xlabel, ylabel) + _y_ticks(y_lo, y_hi)
    for i in range(5):
        v = x_lo + (x_hi - x_lo) * i / 4
        x = MARGIN_L + _PLOT_W * i / 4
        parts.append(
            f'<line x1="{x:.2f}" y1="{HEIGHT - MARGIN_B}" x2="{x:.2f}" y2="{HEIGHT - MARGIN_B + 4}" stroke="#333333"/>'
        )
        parts.append(
            f'<text x="{x:.2f}" y="{HEIGHT - MARGIN_B + 18}" text-anchor="middle" font-size="11">{v:.3g}</text>'
        )
    for i, (name, xs, ys) in enumerate(series):
        if len(xs) != len(ys):
            raise ValidationError(f"series {name!r}: x and y lengths differ")
        pts = " ".join(f"{px(float(x)):.2f},{py(float(y)):.2f}" for x, y in zip(xs, ys))
        color = PALETTE[i % len(PALETTE)]
        parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
    parts += _legend([name for name, _, _ in series])
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def bar_chart(
    title: str,
    ylabel: str,
    labels: Sequence[str],
    series: Sequence[tuple[str, Sequence[float]]],
) -> str:
    """Grouped bar chart: one bar per (label, series) pair."""
    if not labels or not series:
        raise ValidationError("bar_chart needs labels and at least one series")
    for name, values in series:
        if len(values) != len(labels):
            raise ValidationError(f"series {name!r} length does not match labels")
    all_v = [v for _, values in series for v in values]
    y_lo = min(0.0, min(all_v))
    y_hi = max(all_v)
    if y_hi == y_lo:
        y_hi = y_lo + 1.0
    y_hi += 0.05 * (y_hi - y_lo)

    def py(y: float) -> float:
        return HEIGHT - MARGIN_B - _PLOT_H * (y - y_lo) / (y_hi - y_lo)

    parts = _header(title) + _axes("", ylabel) + _y_ticks(y_lo, y_hi)
    n_groups = len(labels)
    n_series = len(series)
    group_w = _PLOT_W / n_groups
    bar_w = group_w * 0.8 / n_series
    for gi, label in enumerate(labels):
        gx = MARGIN_L + group_w * gi
        for si, (name, values) in enumerate(series):
            v = float(values[gi])
            x = gx + group_w * 0.1 + bar_w * si
            top = py(max(v, 0.0))
            bottom = py(min(v, 0.0))
            color = PALETTE[si % len(PALETTE)]
            parts.append(
                f'<rect x="{x:.2f}" y="{top:.2f}" width="{bar_w:.2f}" '
                f'height="{max(bottom - top, 0.0):.2f}" fill="{color}"/>'
            )
        cx = gx + group_w / 2
        text_y = HEIGHT - MARGIN_B + 14
        parts.append(
            f'<text x="{cx:.2f}" y="{text_y}" text-anchor="end" font-size="10" '
            f'transform="rotate(-30 {cx:.2f} {text_y})">{_esc(str(label))}</text>'
        )
    if len(series) > 1:
        parts += _legend([name for name, _ in series])
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
