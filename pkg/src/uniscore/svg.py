"""Minimal SVG emission for ablation curves and metric bars (no plotting dependency)."""

from __future__ import annotations

from pathlib import Path

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e")
_W, _H = 720, 440
_MARGIN = 60


def _scale(value: float, lo: float, hi: float, out_lo: float, out_hi: float) -> float:
    if hi == lo:
        return (out_lo + out_hi) / 2.0
    return out_lo + (value - lo) * (out_hi - out_lo) / (hi - lo)


def _frame(title: str, body: list[str]) -> str:
    head = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="12">',
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="24" text-anchor="middle" font-size="16">{title}</text>',
        f'<line x1="{_MARGIN}" y1="{_H - _MARGIN}" x2="{_W - _MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
        f'<line x1="{_MARGIN}" y1="{_MARGIN}" x2="{_MARGIN}" '
        f'y2="{_H - _MARGIN}" stroke="black"/>',
    ]
    return "\n".join(head + body + ["</svg>"]) + "\n"


def line_chart(
    path: str | Path,
    title: str,
    series: dict[str, list[tuple[float, float]]],
    x_label: str = "",
) -> None:
    """Write one polyline per named series, sharing x/y axes."""
    points = [pt for pts in series.values() for pt in pts]
    if not points:
        raise ValueError("no data points to plot")
    xs = [p[0] for p in points]
    ys = [p[1] for p in points]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(min(ys), 0.0), max(max(ys), 0.0)
    body = []
    for tick in range(5):
        y_val = y_lo + tick * (y_hi - y_lo) / 4 if y_hi != y_lo else y_lo
        y_px = _scale(y_val, y_lo, y_hi, _H - _MARGIN, _MARGIN)
        body.append(
            f'<text x="{_MARGIN - 8}" y="{y_px + 4:.1f}" text-anchor="end">{y_val:.3g}</text>'
        )
    for i, (name, pts) in enumerate(series.items()):
        color = _PALETTE[i % len(_PALETTE)]
        coords = " ".join(
            f"{_scale(x, x_lo, x_hi, _MARGIN, _W - _MARGIN):.1f},"
            f"{_scale(y, y_lo, y_hi, _H - _MARGIN, _MARGIN):.1f}"
            for x, y in sorted(pts)
        )
        body.append(
            f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>'
        )
        body.append(
            f'<text x="{_W - _MARGIN + 4}" y="{_MARGIN + 16 * i + 12}" '
            f'fill="{color}">{name}</text>'
        )
    for x, label in ((x_lo, f"{x_lo:.3g}"), (x_hi, f"{x_hi:.3g}")):
        x_px = _scale(x, x_lo, x_hi, _MARGIN, _W - _MARGIN)
        body.append(
            f'<text x="{x_px:.1f}" y="{_H - _MARGIN + 18}" text-anchor="middle">{label}</text>'
        )
    if x_label:
        body.append(
            f'<text x="{_W / 2}" y="{_H - 12}" text-anchor="middle">{x_label}</text>'
        )
    Path(path).write_text(_frame(title, body), encoding="utf-8")


def bar_chart(path: str | Path, title: str, values: dict[str, float]) -> None:
    """Write one labeled bar per named value."""
    if not values:
        raise ValueError("no values to plot")
    y_lo = min(min(values.values()), 0.0)
    y_hi = max(max(values.values()), 0.0)
    inner = _W - 2 * _MARGIN
    slot = inner / len(values)
    zero_px = _scale(0.0, y_lo, y_hi, _H - _MARGIN, _MARGIN)
    body = []
    for i, (name, value) in enumerate(values.items()):
        color = _PALETTE[i % len(_PALETTE)]
        val_px = _scale(value, y_lo, y_hi, _H - _MARGIN, _MARGIN)
        top = min(zero_px, val_px)
        height = max(abs(zero_px - val_px), 0.5)
        x_px = _MARGIN + i * slot + slot * 0.15
        body.append(
            f'<rect x="{x_px:.1f}" y="{top:.1f}" width="{slot * 0.7:.1f}" '
            f'height="{height:.1f}" fill="{color}"/>'
        )
        body.append(
            f'<text x="{x_px + slot * 0.35:.1f}" y="{_H - _MARGIN + 18}" '
            f'text-anchor="middle">{name}</text>'
        )
        body.append(
            f'<text x="{x_px + slot * 0.35:.1f}" y="{top - 4:.1f}" '
            f'text-anchor="middle">{value:.3g}</text>'
        )
    Path(path).write_text(_frame(title, body), encoding="utf-8")
