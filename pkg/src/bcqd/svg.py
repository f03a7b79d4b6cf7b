"""Minimal static SVG rendering of band envelopes."""

from __future__ import annotations

import math
from xml.sax.saxutils import escape

import numpy as np

WIDTH, HEIGHT, MARGIN = 640, 420, 50


def _polyline(xs, ys, x_map, y_map):
    pts = []
    for x, y in zip(xs, ys):
        if math.isfinite(y):
            pts.append(f"{x_map(x):.2f},{y_map(y):.2f}")
    return " ".join(pts)


def render_bands(grid, bands, truth=None, title: str = "") -> str:
    """SVG text with one lower/upper envelope pair per band.

    Infinite endpoints are clipped to the plot frame.
    """
    grid = np.asarray(grid, dtype=float)
    finite = [v for b in bands for arr in (b.lower, b.upper, b.estimate.qhat_bc)
              for v in arr if math.isfinite(v)]
    if truth is not None:
        finite.extend(float(v) for v in truth)
    lo, hi = (min(finite), max(finite)) if finite else (0.0, 1.0)
    if hi <= lo:
        lo, hi = lo - 0.5, hi + 0.5
    pad = 0.05 * (hi - lo)
    lo, hi = lo - pad, hi + pad

    def x_map(x):
        return MARGIN + (WIDTH - 2 * MARGIN) * x

    def y_map(y):
        y = min(max(y, lo), hi)
        return HEIGHT - MARGIN - (HEIGHT - 2 * MARGIN) * (y - lo) / (hi - lo)

    opacity = max(0.08, min(1.0, 3.0 / max(1, len(bands))))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" '
        f'viewBox="0 0 {WIDTH} {HEIGHT}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<rect x="{MARGIN}" y="{MARGIN}" width="{WIDTH - 2 * MARGIN}" '
        f'height="{HEIGHT - 2 * MARGIN}" fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{WIDTH / 2}" y="{MARGIN / 2}" text-anchor="middle" '
                     f'font-family="sans-serif" font-size="14">{escape(title)}</text>')
    for y in np.linspace(lo, hi, 5):
        parts.append(f'<text x="{MARGIN - 6}" y="{y_map(y) + 4:.2f}" text-anchor="end" '
                     f'font-family="sans-serif" font-size="10">{y:.3g}</text>')
    for x in (0.0, 0.25, 0.5, 0.75, 1.0):
        parts.append(f'<text x="{x_map(x):.2f}" y="{HEIGHT - MARGIN + 16}" '
                     f'text-anchor="middle" font-family="sans-serif" font-size="10">{x:g}</text>')
    for band in bands:
        for arr in (band.lower, band.upper):
            upper_clip = np.where(np.isposinf(arr), hi, arr)
            clipped = np.where(np.isneginf(upper_clip), lo, upper_clip)
            parts.append(f'<polyline fill="none" stroke="gray" stroke-opacity="{opacity:.3f}" '
                         f'points="{_polyline(grid, clipped, x_map, y_map)}"/>')
    if len(bands) == 1:
        parts.append('<polyline fill="none" stroke="black" stroke-dasharray="4 3" points="'
                     + _polyline(grid, bands[0].estimate.qhat_bc, x_map, y_map) + '"/>')
    if truth is not None:
        parts.append('<polyline fill="none" stroke="blue" stroke-width="2" points="'
                     + _polyline(grid, truth, x_map, y_map) + '"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
