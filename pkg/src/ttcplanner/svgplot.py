"""Tiny deterministic SVG writer: line plots with optional horizontal guides, and bar panels."""

from __future__ import annotations

import math
from typing import List, Optional, Sequence, Tuple
from xml.sax.saxutils import escape

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f")


def _f(x: float) -> str:
    return f"{x:.2f}"


def _ticks(lo: float, hi: float, n: int = 5) -> List[float]:
    if hi <= lo:
        return [lo]
    raw = (hi - lo) / n
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw), default=10 * mag)
    start = math.ceil(lo / step) * step
    out, v = [], start
    while v <= hi + 1e-9 * step:
        out.append(round(v, 10))
        v += step
    return out


def _finite_range(arrays, pad=0.05):
    vals = np.concatenate([np.asarray(a, dtype=float).ravel() for a in arrays]) if arrays else np.array([0.0])
    vals = vals[np.isfinite(vals)]
    if vals.size == 0:
        return 0.0, 1.0
    lo, hi = float(vals.min()), float(vals.max())
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo
    return lo - pad * span, hi + pad * span


class _Frame:
    def __init__(self, x0, y0, w, h, xr, yr):
        self.x0, self.y0, self.w, self.h = x0, y0, w, h
        self.xr, self.yr = xr, yr

    def px(self, x):
        return self.x0 + (x - self.xr[0]) / (self.xr[1] - self.xr[0]) * self.w

    def py(self, y):
        return self.y0 + self.h - (y - self.yr[0]) / (self.yr[1] - self.yr[0]) * self.h

    def axes(self, title, xlabel, ylabel) -> List[str]:
        out = [
            f'<rect x="{_f(self.x0)}" y="{_f(self.y0)}" width="{_f(self.w)}" height="{_f(self.h)}" fill="none" stroke="#333"/>',
            f'<text x="{_f(self.x0 + self.w / 2)}" y="{_f(self.y0 - 8)}" text-anchor="middle" font-size="13">{escape(title)}</text>',
            f'<text x="{_f(self.x0 + self.w / 2)}" y="{_f(self.y0 + self.h + 34)}" text-anchor="middle" font-size="11">{escape(xlabel)}</text>',
            f'<text x="{_f(self.x0 - 44)}" y="{_f(self.y0 + self.h / 2)}" text-anchor="middle" font-size="11" '
            f'transform="rotate(-90 {_f(self.x0 - 44)} {_f(self.y0 + self.h / 2)})">{escape(ylabel)}</text>',
        ]
        for tx in _ticks(*self.xr):
            X = self.px(tx)
            out.append(f'<line x1="{_f(X)}" y1="{_f(self.y0 + self.h)}" x2="{_f(X)}" y2="{_f(self.y0 + self.h + 4)}" stroke="#333"/>')
            out.append(f'<text x="{_f(X)}" y="{_f(self.y0 + self.h + 16)}" text-anchor="middle" font-size="10">{tx:g}</text>')
        for ty in _ticks(*self.yr):
            Y = self.py(ty)
            out.append(f'<line x1="{_f(self.x0 - 4)}" y1="{_f(Y)}" x2="{_f(self.x0)}" y2="{_f(Y)}" stroke="#333"/>')
            out.append(f'<text x="{_f(self.x0 - 6)}" y="{_f(Y + 3)}" text-anchor="end" font-size="10">{ty:g}</text>')
        return out


def _document(width, height, body: Sequence[str]) -> str:
    head = f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">'
    return "\n".join([head, '<rect width="100%" height="100%" fill="white"/>', *body, "</svg>"]) + "\n"


def line_plot(
    series: Sequence[Tuple[str, Sequence[float], Sequence[float]]],
    title: str = "",
    xlabel: str = "",
    ylabel: str = "",
    hlines: Sequence[Tuple[float, str]] = (),
    width: int = 720,
    height: int = 420,
) -> str:
    """Polylines for ``(label, xs, ys)`` series; ``hlines`` are dashed guides ``(y, style)`` with style solid|dashed."""
    xs = [np.asarray(s[1], dtype=float) for s in series]
    ys = [np.asarray(s[2], dtype=float) for s in series]
    if hlines:
        ys.append(np.array([h[0] for h in hlines]))
    fr = _Frame(70, 40, width - 200, height - 100, _finite_range(xs, 0.0), _finite_range(ys))
    body = fr.axes(title, xlabel, ylabel)
    for y, style in hlines:
        dash = ' stroke-dasharray="6 4"' if style == "dashed" else ""
        body.append(
            f'<line x1="{_f(fr.x0)}" y1="{_f(fr.py(y))}" x2="{_f(fr.x0 + fr.w)}" y2="{_f(fr.py(y))}" stroke="#999"{dash}/>'
        )
    for k, (label, x, y) in enumerate(series):
        color = PALETTE[k % len(PALETTE)]
        x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        pts = " ".join(f"{_f(fr.px(a))},{_f(fr.py(b))}" for a, b in zip(x[ok], y[ok]))
        body.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.6"/>')
        ly = fr.y0 + 14 + 18 * k
        lx = fr.x0 + fr.w + 14
        body.append(f'<line x1="{_f(lx)}" y1="{_f(ly - 4)}" x2="{_f(lx + 18)}" y2="{_f(ly - 4)}" stroke="{color}" stroke-width="2"/>')
        body.append(f'<text x="{_f(lx + 24)}" y="{_f(ly)}" font-size="11">{escape(label)}</text>')
    return _document(width, height, body)


def bar_panels(
    panels: Sequence[Tuple[str, Sequence[str], Sequence[float]]],
    columns: int = 2,
    width: int = 900,
    height: int = 640,
) -> str:
    """Grid of bar charts, one per ``(title, labels, values)``."""
    rows = math.ceil(len(panels) / columns)
    cell_w, cell_h = width / columns, height / rows
    body: List[str] = []
    for i, (title, labels, values) in enumerate(panels):
        r, c = divmod(i, columns)
        vals = np.asarray(values, dtype=float)
        finite = vals[np.isfinite(vals)]
        top = float(finite.max()) if finite.size else 1.0
        top = top * 1.1 if top > 0 else 1.0
        fr = _Frame(c * cell_w + 70, r * cell_h + 40, cell_w - 100, cell_h - 110, (0.0, float(len(vals))), (0.0, top))
        body.append(f'<text x="{_f(fr.x0 + fr.w / 2)}" y="{_f(fr.y0 - 10)}" text-anchor="middle" font-size="13">{escape(title)}</text>')
        body.append(f'<rect x="{_f(fr.x0)}" y="{_f(fr.y0)}" width="{_f(fr.w)}" height="{_f(fr.h)}" fill="none" stroke="#333"/>')
        for ty in _ticks(0.0, top):
            Y = fr.py(ty)
            body.append(f'<text x="{_f(fr.x0 - 6)}" y="{_f(Y + 3)}" text-anchor="end" font-size="10">{ty:g}</text>')
        for k, (lab, v) in enumerate(zip(labels, vals)):
            h = 0.0 if not np.isfinite(v) else max(v, 0.0)
            x = fr.px(k + 0.15)
            w = fr.px(k + 0.85) - x
            body.append(
                f'<rect x="{_f(x)}" y="{_f(fr.py(h))}" width="{_f(w)}" height="{_f(fr.py(0) - fr.py(h))}" fill="{PALETTE[k % len(PALETTE)]}"/>'
            )
            body.append(
                f'<text x="{_f(x + w / 2)}" y="{_f(fr.y0 + fr.h + 14)}" text-anchor="end" font-size="10" '
                f'transform="rotate(-30 {_f(x + w / 2)} {_f(fr.y0 + fr.h + 14)})">{escape(str(lab))}</text>'
            )
    return _document(width, height, body)
