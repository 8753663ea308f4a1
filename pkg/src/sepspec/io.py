"""CSV and SVG writers.

CSV follows RFC 4180 (comma separated, CRLF line ends, minimal quoting);
floats are written with 17 significant digits so values round-trip exactly.
The SVG writer draws one polyline per series with annotated axes.
"""

from __future__ import annotations

import csv
import math
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

__all__ = ["format_value", "write_csv", "read_csv", "write_svg"]


def format_value(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".17g")
    return str(v)


def write_csv(path, rows: Iterable[Sequence]) -> Path:
    """Write rows (header first) to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="ascii") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        for row in rows:
            w.writerow([format_value(v) for v in row])
    return path


def read_csv(path) -> list[dict]:
    with open(path, newline="", encoding="ascii") as fh:
        return list(csv.DictReader(fh))


def _ticks(lo: float, hi: float, n: int = 5) -> list[float]:
    if not hi > lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + i * step for i in range(int((hi - start) / step + 1e-9) + 1)]


def write_svg(path, series: dict, title: str = "", xlabel: str = "", ylabel: str = "",
              width: int = 640, height: int = 400, logy: bool = False) -> Path:
    """Line plot of ``{name: (x, y)}`` as a standalone SVG file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    colours = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"]
    xs, ys = [], []
    data = {}
    for name, (x, y) in series.items():
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if logy:
            keep = y > 0
            x, y = x[keep], np.log10(y[keep])
        data[name] = (x, y)
        xs.append(x)
        ys.append(y)
    ax = np.concatenate(xs) if xs else np.zeros(1)
    ay = np.concatenate(ys) if ys else np.zeros(1)
    x0, x1 = float(np.min(ax)), float(np.max(ax))
    y0, y1 = float(np.min(ay)), float(np.max(ay))
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    ml, mr, mt, mb = 70, 20, 30, 50
    pw, ph = width - ml - mr, height - mt - mb

    def px(v):
        return ml + (v - x0) / (x1 - x0) * pw

    def py(v):
        return mt + ph - (v - y0) / (y1 - y0) * ph

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">',
           f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
           f'<text x="{width / 2:.1f}" y="18" text-anchor="middle" font-size="14">{escape(title)}</text>',
           f'<line x1="{ml}" y1="{mt + ph}" x2="{ml + pw}" y2="{mt + ph}" stroke="black"/>',
           f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ph}" stroke="black"/>']
    for t in _ticks(x0, x1):
        out.append(f'<line x1="{px(t):.2f}" y1="{mt + ph}" x2="{px(t):.2f}" y2="{mt + ph + 5}" stroke="black"/>')
        out.append(f'<text x="{px(t):.2f}" y="{mt + ph + 18}" text-anchor="middle" font-size="10">{t:.4g}</text>')
    for t in _ticks(y0, y1):
        lab = f"1e{t:.3g}" if logy else f"{t:.4g}"
        out.append(f'<line x1="{ml - 5}" y1="{py(t):.2f}" x2="{ml}" y2="{py(t):.2f}" stroke="black"/>')
        out.append(f'<text x="{ml - 8}" y="{py(t) + 3:.2f}" text-anchor="end" font-size="10">{lab}</text>')
    out.append(f'<text x="{ml + pw / 2:.1f}" y="{height - 10}" text-anchor="middle" font-size="12">{escape(xlabel)}</text>')
    out.append(f'<text x="15" y="{mt + ph / 2:.1f}" text-anchor="middle" font-size="12" '
               f'transform="rotate(-90 15 {mt + ph / 2:.1f})">{escape(ylabel)}</text>')
    for i, (name, (x, y)) in enumerate(data.items()):
        col = colours[i % len(colours)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        out.append(f'<polyline fill="none" stroke="{col}" stroke-width="1.2" points="{pts}"/>')
        out.append(f'<text x="{ml + pw - 5}" y="{mt + 14 + 14 * i}" text-anchor="end" font-size="11" '
                   f'fill="{col}">{escape(str(name))}</text>')
    out.append("</svg>")
    path.write_text("\n".join(out) + "\n", encoding="utf-8")
    return path
