"""Minimal SVG chart writer for the CLI reports.

Only what the reports need: axes with ticks, polylines, markers with
vertical error bars, and a legend.  Output is deterministic text.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from html import escape
from pathlib import Path
from typing import Sequence

import numpy as np

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")


@dataclass
class Series:
    x: Sequence[float]
    y: Sequence[float]
    label: str
    style: str = "line"  # "line" or "points"
    yerr: Sequence[float] | None = None
    color: str | None = None


@dataclass
class Chart:
    title: str
    xlabel: str
    ylabel: str
    width: int = 720
    height: int = 480
    series: list[Series] = field(default_factory=list)
    equal_axes: bool = False

    def add(self, *args, **kwargs) -> "Chart":
        self.series.append(Series(*args, **kwargs))
        return self

    def render(self) -> str:
        return _render(self)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.render(), encoding="utf-8")


def _nice_ticks(lo: float, hi: float, target: int = 6) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / target
    mag = 10 ** math.floor(math.log10(raw))
    step = next(m * mag for m in (1, 2, 2.5, 5, 10) if m * mag >= raw)
    first = math.ceil(lo / step) * step
    ticks = []
    v = first
    while v <= hi + 1e-9 * step:
        ticks.append(round(v, 12))
        v += step
    return ticks


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def _limits(chart: Chart) -> tuple[float, float, float, float]:
    xs, ys = [], []
    for s in chart.series:
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        err = np.zeros_like(y) if s.yerr is None else np.asarray(s.yerr, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        xs.append(x[ok])
        ys.extend([y[ok] - err[ok], y[ok] + err[ok]])
    x = np.concatenate(xs) if xs else np.array([0.0, 1.0])
    y = np.concatenate(ys) if ys else np.array([0.0, 1.0])
    if x.size == 0:
        x = np.array([0.0, 1.0])
    if y.size == 0:
        y = np.array([0.0, 1.0])
    x0, x1, y0, y1 = float(x.min()), float(x.max()), float(y.min()), float(y.max())
    if chart.equal_axes:
        x0 = y0 = min(x0, y0)
        x1 = y1 = max(x1, y1)
    pad_x = 0.05 * (x1 - x0 or 1.0)
    pad_y = 0.05 * (y1 - y0 or 1.0)
    return x0 - pad_x, x1 + pad_x, y0 - pad_y, y1 + pad_y


def _render(chart: Chart) -> str:
    w, h = chart.width, chart.height
    left, right, top, bottom = 70, 20, 40, 55
    pw, ph = w - left - right, h - top - bottom
    x0, x1, y0, y1 = _limits(chart)

    def px(v: float) -> float:
        return left + (v - x0) / (x1 - x0) * pw

    def py(v: float) -> float:
        return top + (y1 - v) / (y1 - y0) * ph

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" '
        f'viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">',
        f'<rect width="{w}" height="{h}" fill="white"/>',
        f'<text x="{w / 2:.1f}" y="22" text-anchor="middle" font-size="14">{escape(chart.title)}</text>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for t in _nice_ticks(x0, x1):
        if x0 <= t <= x1:
            X = px(t)
            out.append(f'<line x1="{X:.2f}" y1="{top}" x2="{X:.2f}" y2="{top + ph}" stroke="#ddd"/>')
            out.append(f'<text x="{X:.2f}" y="{top + ph + 16}" text-anchor="middle">{_fmt(t)}</text>')
    for t in _nice_ticks(y0, y1):
        if y0 <= t <= y1:
            Y = py(t)
            out.append(f'<line x1="{left}" y1="{Y:.2f}" x2="{left + pw}" y2="{Y:.2f}" stroke="#ddd"/>')
            out.append(f'<text x="{left - 6}" y="{Y + 4:.2f}" text-anchor="end">{_fmt(t)}</text>')
    out.append(
        f'<text x="{left + pw / 2:.1f}" y="{h - 15}" text-anchor="middle">{escape(chart.xlabel)}</text>'
    )
    out.append(
        f'<text x="18" y="{top + ph / 2:.1f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {top + ph / 2:.1f})">{escape(chart.ylabel)}</text>'
    )
    for i, s in enumerate(chart.series):
        color = s.color or PALETTE[i % len(PALETTE)]
        x = np.asarray(s.x, dtype=float)
        y = np.asarray(s.y, dtype=float)
        ok = np.isfinite(x) & np.isfinite(y)
        if s.style == "line":
            pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x[ok], y[ok]))
            out.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        else:
            err = None if s.yerr is None else np.asarray(s.yerr, dtype=float)
            r = 3 if x.size < 2000 else 1
            for k in np.flatnonzero(ok):
                X, Y = px(x[k]), py(y[k])
                if err is not None and err[k] > 0:
                    ya, yb = py(y[k] - err[k]), py(y[k] + err[k])
                    out.append(f'<line x1="{X:.2f}" y1="{ya:.2f}" x2="{X:.2f}" y2="{yb:.2f}" stroke="{color}"/>')
                    for yy in (ya, yb):
                        out.append(
                            f'<line x1="{X - 4:.2f}" y1="{yy:.2f}" x2="{X + 4:.2f}" y2="{yy:.2f}" stroke="{color}"/>'
                        )
                out.append(f'<circle cx="{X:.2f}" cy="{Y:.2f}" r="{r}" fill="{color}"/>')
        ly = top + 14 + 16 * i
        out.append(f'<rect x="{left + 10}" y="{ly - 9}" width="12" height="3" fill="{color}"/>')
        out.append(f'<text x="{left + 28}" y="{ly - 3}">{escape(s.label)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
