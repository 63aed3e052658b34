"""Minimal standalone SVG line plots."""

from __future__ import annotations

from typing import Sequence

import numpy as np

COLORS = ("#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")


def polyline_svg(curves: Sequence[np.ndarray], labels: Sequence[str] | None = None, size: int = 480, margin: int = 40) -> str:
    """Render (n, 2) point arrays with equal axis scaling, axes through the origin."""
    pts = np.vstack([np.asarray(c, dtype=float)[:, :2] for c in curves] + [np.zeros((1, 2))])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = max(float((hi - lo).max()), 1e-9)
    scale = (size - 2 * margin) / span

    def xy(p):
        return margin + (p[0] - lo[0]) * scale, size - margin - (p[1] - lo[1]) * scale

    ox, oy = xy((0.0, 0.0))
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
        f'<line x1="{margin}" y1="{oy:.2f}" x2="{size - margin}" y2="{oy:.2f}" stroke="#999" stroke-width="1"/>',
        f'<line x1="{ox:.2f}" y1="{margin}" x2="{ox:.2f}" y2="{size - margin}" stroke="#999" stroke-width="1"/>',
        f'<text x="{size - margin}" y="{oy - 4:.2f}" font-size="11" text-anchor="end">x</text>',
        f'<text x="{ox + 4:.2f}" y="{margin + 10}" font-size="11">y</text>',
    ]
    for i, c in enumerate(curves):
        color = COLORS[i % len(COLORS)]
        coords = " ".join("{:.2f},{:.2f}".format(*xy(p)) for p in np.asarray(c)[:, :2])
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"/>')
        if labels:
            parts.append(f'<text x="{margin}" y="{14 + 14 * i}" font-size="12" fill="{color}">{labels[i]}</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_svg(path, curves, labels=None) -> None:
    with open(path, "w") as fh:
        fh.write(polyline_svg(curves, labels))
