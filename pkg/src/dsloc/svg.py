"""Layered SVG pictures of one tree node's scaffolding.

Four layers (partition triangles, spanning tree, arrangement, Steiner
triangulation) are ``<g class="layer">`` groups; the subdivision is drawn
on top as a separate overlay group.
"""
from __future__ import annotations

from xml.sax.saxutils import quoteattr

from . import low_crossing as lc
from .geometry import ConvexPolygon
from .partition_tree import Structure

LAYERS = ("triangles", "tree", "arrangement", "triangulation")
STYLE = {
    "triangles": 'fill="#4a90d9" fill-opacity="0.15" stroke="#2c5d8f" stroke-width="1"',
    "tree": 'fill="none" stroke="#d0021b" stroke-width="1.5"',
    "arrangement": 'fill="none" stroke="#555" stroke-width="0.8"',
    "triangulation": 'fill="none" stroke="#7ed321" stroke-width="0.5" stroke-dasharray="3,2"',
    "subdivision": 'fill="none" stroke="#000" stroke-width="1.2"',
}
SIZE = 800


class _Frame:
    def __init__(self, pts):
        xs = [float(p.x) for p in pts]
        ys = [float(p.y) for p in pts]
        self.x0, self.y0 = min(xs), min(ys)
        span = max(max(xs) - self.x0, max(ys) - self.y0) or 1.0
        self.k = (SIZE - 20) / span

    def xy(self, p) -> str:
        x = 10 + (float(p.x) - self.x0) * self.k
        y = SIZE - 10 - (float(p.y) - self.y0) * self.k
        return f"{x:.3f},{y:.3f}"


def _poly(frame, pts) -> str:
    return '<polygon points="' + " ".join(frame.xy(p) for p in pts) + '"/>'


def _line(frame, a, b) -> str:
    return f'<polyline points="{frame.xy(a)} {frame.xy(b)}"/>'


def render_node(S: Structure, node_id: int) -> str:
    """SVG text for one node; raises KeyError for an unknown node id."""
    if not 0 <= node_id < len(S.tree.nodes):
        raise KeyError(f"no node {node_id}")
    nd = S.tree.nodes[node_id]
    region = list(nd.region.vertices if isinstance(nd.region, ConvexPolygon) else nd.region)
    parts = {name: [] for name in LAYERS}
    if nd.partition is not None:
        V = lc.vertex_set(nd.partition, nd.box)
        tree = lc.SpanningTree(tuple(V), tuple(nd.tree_edges))
        A = lc.triangulate_arrangement(nd.partition, tree, nd.box)
        frame = _Frame(list(nd.box.vertices))
        parts["triangles"] = [_poly(frame, t) for t in nd.partition.triangles]
        parts["tree"] = [_line(frame, a, b) for a, b in tree.segments()]
        parts["arrangement"] = [_line(frame, A.arrangement.vertices[i], A.arrangement.vertices[j])
                                for i, j in A.arrangement.edges]
        parts["triangulation"] = [_poly(frame, t) for t in A.triangles]
    else:
        frame = _Frame(region)
        parts["triangles"] = [_poly(frame, region)]
    overlay = [_line(frame, s.a, s.b) for s in S.G.segments()]
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" '
        f'viewBox="0 0 {SIZE} {SIZE}">',
        f"<title>node {node_id} ({nd.kind})</title>",
    ]
    for name in LAYERS:
        out.append(f'<g class="layer" id={quoteattr(name)} {STYLE[name]}>')
        out.extend(parts[name])
        out.append("</g>")
    out.append(f'<g class="overlay" id="subdivision" {STYLE["subdivision"]}>')
    out.extend(overlay)
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
