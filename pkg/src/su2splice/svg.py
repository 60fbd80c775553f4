"""SVG renderings of pillowcase curve sets.

The drawing is the fundamental domain ``[0, pi] x [0, 2pi]`` with ``alpha``
to the right and ``beta`` up.  Output depends only on the input coordinates,
so renders of a CSV are reproducible byte for byte.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .pillowcase import PI, TWO_PI, Polyline, canonical_array

PALETTE = ("#c0392b", "#2c3e50", "#27ae60", "#8e44ad", "#d35400", "#16a085", "#7f8c8d")
LINE_COLOR = "#2e86de"


def _runs(canon: np.ndarray, jump: float = 1.0) -> list:
    """Split canonical vertices where consecutive points jump across the
    fundamental domain."""
    if len(canon) == 0:
        return []
    cuts = np.nonzero(np.linalg.norm(np.diff(canon, axis=0), axis=1) > jump)[0] + 1
    return [r for r in np.split(canon, cuts) if len(r) > 1]


def _line_runs(coords: np.ndarray) -> list:
    """Runs of a lifted curve with ``0 <= a <= pi``, cut exactly where ``b``
    crosses a multiple of ``2pi``."""
    pts = [coords[0]]
    for p, q in zip(coords[:-1], coords[1:]):
        lo, hi = sorted((p[1], q[1]))
        for k in range(math.ceil(lo / TWO_PI), math.floor(hi / TWO_PI) + 1):
            t = (k * TWO_PI - p[1]) / (q[1] - p[1])
            if 0.0 < t < 1.0:
                pts.append(p + t * (q - p))
        pts.append(q)
    runs, cell = [], None
    for p, q in zip(pts[:-1], pts[1:]):
        if np.allclose(p, q):
            continue
        c = math.floor(0.5 * (p[1] + q[1]) / TWO_PI)
        if c != cell:
            runs.append([p])
            cell = c
        runs[-1].append(q)
    return [np.array(r) - np.array([0.0, TWO_PI * math.floor(0.5 * (r[0][1] + r[1][1]) / TWO_PI)]) for r in runs]


def _path(run: np.ndarray, sx: float, sy: float, pad: float, height: float) -> str:
    pts = [f"{pad + a * sx:.3f},{height - pad - b * sy:.3f}" for a, b in run]
    return "M" + " L".join(pts)


def overlay_lines(n: int = 4, samples: int = 33) -> dict:
    """``L_0 = {n a + b = 0}`` and ``L_pi = {n a + b = pi}`` mod ``2pi``.  The
    lines wrap at multiples of ``pi / 4``, which the default sampling hits
    exactly."""
    a = np.linspace(0.0, PI, samples)
    return {f"L_{name}": Polyline(np.stack([a, theta - n * a], -1)) for name, theta in (("0", 0.0), ("pi", PI))}


def render_svg(curves: Sequence, labels: Sequence[str] | None = None, points: Sequence = (),
               lines: bool = True, width: int = 360, title: str = "") -> str:
    """SVG text for ``curves`` (Polylines or objects with ``.curve``)."""
    pad = 24.0
    sx = (width - 2 * pad) / PI
    sy = sx
    height = 2 * pad + TWO_PI * sy
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height:.0f}" '
        f'viewBox="0 0 {width} {height:.0f}">',
        f'<rect x="{pad}" y="{pad}" width="{PI * sx:.3f}" height="{TWO_PI * sy:.3f}" '
        'fill="none" stroke="#000" stroke-width="1"/>',
        f'<line x1="{pad}" y1="{height - pad - PI * sy:.3f}" x2="{pad + PI * sx:.3f}" '
        f'y2="{height - pad - PI * sy:.3f}" stroke="#999" stroke-dasharray="3,3" stroke-width="0.5"/>',
    ]
    if title:
        out.append(f'<text x="{pad}" y="{pad - 8}" font-size="11" font-family="sans-serif">{title}</text>')
    if lines:
        for name, poly in overlay_lines().items():
            for run in _line_runs(poly.coords):
                out.append(f'<path d="{_path(run, sx, sy, pad, height)}" fill="none" stroke="{LINE_COLOR}" '
                           f'stroke-width="1.5" stroke-opacity="0.6"><title>{name}</title></path>')
    for k, c in enumerate(curves):
        poly = c.curve if hasattr(c, "curve") else c
        color = PALETTE[k % len(PALETTE)]
        name = labels[k] if labels and k < len(labels) else f"curve {k}"
        for run in _runs(poly.canonical):
            out.append(f'<path d="{_path(run, sx, sy, pad, height)}" fill="none" stroke="{color}" '
                       f'stroke-width="1.2"><title>{name}</title></path>')
    for p in points:
        a, b = canonical_array(tuple(p))[0]
        out.append(f'<circle cx="{pad + a * sx:.3f}" cy="{height - pad - b * sy:.3f}" r="3" fill="#000"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg(path, curves: Sequence, **kw) -> None:
    with open(path, "w") as fh:
        fh.write(render_svg(curves, **kw))
