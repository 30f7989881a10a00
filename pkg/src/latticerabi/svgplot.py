"""Minimal deterministic SVG line charts.

Hand-rolled on purpose: the output bytes depend only on the input data,
with no timestamps, hashes or library-version drift, so plot files are
bit-reproducible alongside the CSV they were drawn from.
"""

from __future__ import annotations

import math
import os

from .errors import UsageError

__all__ = ["read_table", "line_chart", "emit_plots"]

WIDTH = 800
HEIGHT = 500
MARGIN_L, MARGIN_R, MARGIN_T, MARGIN_B = 72, 24, 40, 52


def read_table(path: str) -> tuple[list[str], list[list[float]]]:
    """Parse a simple numeric CSV; report the line number on failure."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].strip():
        raise UsageError(f"{path}: line 1: missing header row")
    header = [h.strip() for h in lines[0].split(",")]
    columns: list[list[float]] = [[] for _ in header]
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split(",")
        if len(cells) != len(header):
            raise UsageError(
                f"{path}: line {lineno}: expected {len(header)} cells, got {len(cells)}")
        try:
            values = [float(c) for c in cells]
        except ValueError as exc:
            raise UsageError(f"{path}: line {lineno}: {exc}") from exc
        for col, v in zip(columns, values):
            col.append(v)
    return header, columns


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if not (math.isfinite(lo) and math.isfinite(hi)):
        return []
    if lo == hi:
        lo, hi = lo - 0.5, hi + 0.5
    span = hi - lo
    raw = span / target
    mag = 10.0 ** math.floor(math.log10(raw))
    for mult in (1.0, 2.0, 5.0, 10.0):
        if raw <= mult * mag:
            step = mult * mag
            break
    first = math.ceil(lo / step) * step
    ticks = []
    t = first
    while t <= hi + 1e-9 * span:
        ticks.append(0.0 if abs(t) < 1e-12 * span else t)
        t += step
    return ticks


def _fmt(v: float) -> str:
    return format(v, ".6g")


def line_chart(x: list[float], y: list[float], xlabel: str, ylabel: str, title: str) -> str:
    """One polyline chart as an SVG string; empty data gives bare axes."""
    plot_w = WIDTH - MARGIN_L - MARGIN_R
    plot_h = HEIGHT - MARGIN_T - MARGIN_B
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        f'<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>',
        f'<text x="{WIDTH / 2:g}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="16">{title}</text>',
    ]
    finite = [(a, b) for a, b in zip(x, y) if math.isfinite(a) and math.isfinite(b)]
    if finite:
        xs = [a for a, _ in finite]
        ys = [b for _, b in finite]
        x_lo, x_hi = min(xs), max(xs)
        y_lo, y_hi = min(ys), max(ys)
        if x_lo == x_hi:
            x_lo, x_hi = x_lo - 0.5, x_hi + 0.5
        if y_lo == y_hi:
            y_lo, y_hi = y_lo - 0.5, y_hi + 0.5
        pad = 0.04 * (y_hi - y_lo)
        y_lo -= pad
        y_hi += pad

        def px(a: float) -> float:
            return MARGIN_L + (a - x_lo) / (x_hi - x_lo) * plot_w

        def py(b: float) -> float:
            return MARGIN_T + (y_hi - b) / (y_hi - y_lo) * plot_h

        for t in _nice_ticks(x_lo, x_hi):
            parts.append(f'<line x1="{px(t):.2f}" y1="{MARGIN_T + plot_h}" '
                         f'x2="{px(t):.2f}" y2="{MARGIN_T + plot_h + 5}" stroke="black"/>')
            parts.append(f'<text x="{px(t):.2f}" y="{MARGIN_T + plot_h + 20}" '
                         f'text-anchor="middle" font-family="sans-serif" font-size="11">'
                         f'{_fmt(t)}</text>')
        for t in _nice_ticks(y_lo, y_hi):
            parts.append(f'<line x1="{MARGIN_L - 5}" y1="{py(t):.2f}" '
                         f'x2="{MARGIN_L}" y2="{py(t):.2f}" stroke="black"/>')
            parts.append(f'<text x="{MARGIN_L - 8}" y="{py(t):.2f}" text-anchor="end" '
                         f'dominant-baseline="middle" font-family="sans-serif" '
                         f'font-size="11">{_fmt(t)}</text>')
        points = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in finite)
        parts.append(f'<polyline points="{points}" fill="none" stroke="#1f6fb2" '
                     f'stroke-width="1.5"/>')
    else:
        parts.append(f'<text x="{WIDTH / 2:g}" y="{HEIGHT / 2:g}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="13" fill="#888">no data</text>')
    parts.append(f'<rect x="{MARGIN_L}" y="{MARGIN_T}" width="{plot_w}" height="{plot_h}" '
                 f'fill="none" stroke="black"/>')
    parts.append(f'<text x="{MARGIN_L + plot_w / 2:g}" y="{HEIGHT - 12}" '
                 f'text-anchor="middle" font-family="sans-serif" font-size="13">{xlabel}</text>')
    parts.append(f'<text x="18" y="{MARGIN_T + plot_h / 2:g}" text-anchor="middle" '
                 f'font-family="sans-serif" font-size="13" '
                 f'transform="rotate(-90 18 {MARGIN_T + plot_h / 2:g})">{ylabel}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def emit_plots(csv_path: str, out_dir: str) -> list[str]:
    """One SVG per non-abscissa column of the CSV; returns written paths."""
    header, columns = read_table(csv_path)
    if len(header) < 2:
        raise UsageError(f"{csv_path}: need at least two columns to plot")
    os.makedirs(out_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(csv_path))[0]
    x = columns[0]
    written = []
    for name, col in zip(header[1:], columns[1:]):
        svg = line_chart(x, col, header[0], name, f"{stem}: {name}")
        path = os.path.join(out_dir, f"{stem}_{name}.svg")
        with open(path, "w", newline="\n") as fh:
            fh.write(svg)
        written.append(path)
    return written
