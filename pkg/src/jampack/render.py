"""SVG drawings of planar packings and DOT contact graphs for d >= 3."""

from __future__ import annotations

import itertools

import numpy as np

from .container import Container
from .verify import ContactGraph

SIZE = 400.0
MARGIN = 20.0


def polygon_vertices(container: Container) -> np.ndarray:
    """Vertices of a planar container in counter-clockwise order."""
    if container.d != 2:
        raise ValueError("polygon outline needs d = 2")
    N, b = container.normals, container.offsets
    pts = []
    for p, q in itertools.combinations(range(len(b)), 2):
        A = N[[p, q]]
        if abs(np.linalg.det(A)) < 1e-12:
            continue
        y = np.linalg.solve(A, b[[p, q]])
        if np.all(N @ y - b >= -1e-9):
            pts.append(y)
    pts = np.unique(np.round(np.array(pts), 12), axis=0)
    c = pts.mean(axis=0)
    order = np.argsort(np.arctan2(pts[:, 1] - c[1], pts[:, 0] - c[0]))
    return pts[order]


def _fmt(v: float) -> str:
    return f"{v:.4f}"


def render_svg(container: Container, x, r: float, graph: ContactGraph) -> str:
    """Outline, disks of radius ``r``, contact segments and wall ticks."""
    x = np.asarray(x, dtype=float)
    lo, hi = container.bounds
    scale = (SIZE - 2 * MARGIN) / float(np.max(hi - lo))
    width = (hi[0] - lo[0]) * scale + 2 * MARGIN
    height = (hi[1] - lo[1]) * scale + 2 * MARGIN

    def px(p):
        return MARGIN + (p[0] - lo[0]) * scale, height - MARGIN - (p[1] - lo[1]) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_fmt(width)}" height="{_fmt(height)}" '
        f'viewBox="0 0 {_fmt(width)} {_fmt(height)}">',
    ]
    pts = " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in map(px, polygon_vertices(container)))
    out.append(f'<polygon class="container" points="{pts}" fill="none" stroke="black" stroke-width="1.5"/>')
    for i, c in enumerate(x):
        cx, cy = px(c)
        out.append(f'<circle class="sphere" id="s{i}" cx="{_fmt(cx)}" cy="{_fmt(cy)}" r="{_fmt(r * scale)}" '
                   'fill="#cfe0f5" stroke="#1f4e89" stroke-width="1"/>')
    for i, j in graph.pairs:
        (x1, y1), (x2, y2) = px(x[i]), px(x[j])
        out.append(f'<line class="contact" x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                   'stroke="black" stroke-width="1"/>')
    tick = 0.04 * float(np.max(hi - lo))
    for i, w in graph.walls:
        a = container.normals[w]
        foot = x[i] - r * a
        (x1, y1), (x2, y2) = px(foot), px(foot - tick * a)
        out.append(f'<line class="wall-contact" x1="{_fmt(x1)}" y1="{_fmt(y1)}" x2="{_fmt(x2)}" y2="{_fmt(y2)}" '
                   'stroke="#b22222" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_dot(n: int, graph: ContactGraph, name: str = "packing") -> str:
    """Sphere nodes ``s<i>``, contact edges, wall contacts as labeled leaves."""
    out = [f"graph {name} {{", "  node [shape=circle];"]
    out += [f'  s{i} [label="{i}"];' for i in range(n)]
    out += [f"  s{i} -- s{j};" for i, j in graph.pairs]
    for i, w in graph.walls:
        out.append(f'  w{i}_{w} [shape=box, label="wall {w}"];')
        out.append(f"  s{i} -- w{i}_{w};")
    out.append("}")
    return "\n".join(out) + "\n"
