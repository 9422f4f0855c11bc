"""Input subdivisions: loading, validation, normalization and brute-force location.

Faces are supplied explicitly (label plus one interior point).  The location
oracle needs no face tracing: a point's face is identified by the parity of a
rightward ray's crossings with every fundamental cycle of the edge graph.  Two
points lie in the same face exactly when all of these parities agree.
"""
from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
from gmpy2 import mpq
from scipy import sparse

from .geometry import (Point, Segment, Triangle, orient, point, point_on_segment, points_to_array,
                       segment_meets_open_triangle, touches_at_endpoints_only, to_q)
from .measure import Component, MeasureSpec


class ParseError(ValueError):
    pass


class NonPlanarInput(ValueError):
    pass


class InvalidFaces(ValueError):
    pass


@dataclass(frozen=True)
class Face:
    label: str
    point: Point


class FaceClass(NamedTuple):
    single: bool
    label: str | None


class Location(NamedTuple):
    label: str
    on_boundary: bool


@dataclass(frozen=True, eq=False)
class Subdivision:
    vertices: tuple[Point, ...]
    edges: tuple[tuple[int, int], ...]
    faces: tuple[Face, ...]
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple((int(i), int(j)) for i, j in self.edges))
        object.__setattr__(self, "faces", tuple(self.faces))
        if self.validate:
            _validate(self)

    @property
    def n(self) -> int:
        return len(self.vertices)

    def segments(self) -> list[Segment]:
        return [Segment(self.vertices[i], self.vertices[j]) for i, j in self.edges]

    def labels(self) -> list[str]:
        return [f.label for f in self.faces]

    def __eq__(self, other):
        return (isinstance(other, Subdivision) and self.vertices == other.vertices
                and self.edges == other.edges and self.faces == other.faces)

    def __hash__(self):
        return hash((self.vertices, self.edges, self.faces))

    @cached_property
    def _arrays(self):
        return _EdgeArrays(self)

    @cached_property
    def _locator(self):
        return _ParityLocator(self)

    @property
    def outer_label(self) -> str:
        return self._locator.outer_label

    def bounding_box(self):
        xs = [p.x for p in self.vertices]
        ys = [p.y for p in self.vertices]
        return min(xs), min(ys), max(xs), max(ys)


class _EdgeArrays:
    def __init__(self, G: Subdivision):
        segs = G.segments()
        self.segments = segs
        self.a = points_to_array([s.a for s in segs]) if segs else np.zeros((0, 2))
        self.b = points_to_array([s.b for s in segs]) if segs else np.zeros((0, 2))
        self.lo = np.minimum(self.a, self.b)
        self.hi = np.maximum(self.a, self.b)
        self.verts = points_to_array(G.vertices) if G.vertices else np.zeros((0, 2))
        allc = np.abs(np.concatenate([self.a, self.b, self.verts])) if segs else np.zeros(1)
        self.scale = 1.0 + (float(allc.max()) if allc.size else 0.0)


_REL = 1e-9


def _ray_crossings(arr: _EdgeArrays, pts: Sequence[Point]):
    """Crossing matrix (points x edges) for rightward rays, plus on-edge flags per point.

    Half-open rule: an edge counts when exactly one endpoint has y > p.y and the
    edge lies strictly right of p.  Equivalent to locating p + (eps, eps^2).
    """
    P = points_to_array(pts)
    E = len(arr.segments)
    if E == 0:
        return np.zeros((len(pts), 0), dtype=bool), np.zeros(len(pts), dtype=bool)
    scale = max(arr.scale, 1.0 + float(np.abs(P).max()))
    tol_y = _REL * scale
    tol = _REL * scale * scale
    px = P[:, 0:1]
    py = P[:, 1:2]
    ay, by = arr.a[None, :, 1], arr.b[None, :, 1]
    ax, bx = arr.a[None, :, 0], arr.b[None, :, 0]
    above_a = ay > py
    above_b = by > py
    straddle = above_a != above_b
    # orientation of (lower, upper, p)
    det = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    det = np.where(ay < by, det, -det)
    cross = straddle & (det > 0)
    unsure = (np.abs(ay - py) <= tol_y) | (np.abs(by - py) <= tol_y) | (np.abs(det) <= tol)
    near = ((px >= arr.lo[None, :, 0] - tol_y) & (px <= arr.hi[None, :, 0] + tol_y)
            & (py >= arr.lo[None, :, 1] - tol_y) & (py <= arr.hi[None, :, 1] + tol_y))
    on_edge = np.zeros(len(pts), dtype=bool)
    for qi, ei in np.argwhere(unsure):
        p = pts[qi]
        s = arr.segments[ei]
        a, b = s
        if (a.y > p.y) != (b.y > p.y):
            lo, hi = (a, b) if a.y < b.y else (b, a)
            cross[qi, ei] = orient(lo, hi, p) > 0
        else:
            cross[qi, ei] = False
        if near[qi, ei] and point_on_segment(p, s):
            on_edge[qi] = True
    return cross, on_edge


class _ParityLocator:
    def __init__(self, G: Subdivision):
        self.G = G
        n, edges = G.n, G.edges
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        tree_adj = defaultdict(list)
        nontree = []
        for ei, (u, v) in enumerate(edges):
            ru, rv = find(u), find(v)
            if ru == rv:
                nontree.append(ei)
            else:
                parent[ru] = rv
                tree_adj[u].append((v, ei))
                tree_adj[v].append((u, ei))
        self.components = len({find(v) for v in range(n)})
        # root every tree; parent edge and depth per vertex
        par = [-1] * n
        par_edge = [-1] * n
        depth = [0] * n
        seen = [False] * n
        for s in range(n):
            if seen[s]:
                continue
            seen[s] = True
            dq = deque([s])
            while dq:
                u = dq.popleft()
                for v, ei in tree_adj[u]:
                    if not seen[v]:
                        seen[v] = True
                        par[v], par_edge[v], depth[v] = u, ei, depth[u] + 1
                        dq.append(v)
        rows, cols = [], []
        for ci, ei in enumerate(nontree):
            u, v = edges[ei]
            cyc = [ei]
            while u != v:
                if depth[u] >= depth[v]:
                    cyc.append(par_edge[u])
                    u = par[u]
                else:
                    cyc.append(par_edge[v])
                    v = par[v]
            rows.extend([ci] * len(cyc))
            cols.extend(cyc)
        self.n_cycles = len(nontree)
        self.M = sparse.csr_matrix((np.ones(len(rows), dtype=np.int32), (rows, cols)),
                                   shape=(len(nontree), len(edges)))
        self.table: dict[bytes, str] = {}
        self.outer_label = None
        if G.faces:
            sigs, on_edge = self.signatures([f.point for f in G.faces])
            for f, s, ob in zip(G.faces, sigs, on_edge):
                if ob:
                    raise InvalidFaces(f"representative point of face {f.label!r} lies on an edge")
                if s in self.table:
                    raise InvalidFaces(
                        f"faces {self.table[s]!r} and {f.label!r} have representative points in the same region")
                self.table[s] = f.label
            zero = self._key(np.zeros(self.n_cycles, dtype=np.int64))
            self.outer_label = self.table.get(zero)

    @staticmethod
    def _key(bits: np.ndarray) -> bytes:
        return np.packbits(bits.astype(np.uint8) & 1).tobytes()

    def signatures(self, pts: Sequence[Point], chunk: int = 256):
        keys, flags = [], []
        arr = self.G._arrays
        for start in range(0, len(pts), chunk):
            part = pts[start:start + chunk]
            cross, on_edge = _ray_crossings(arr, part)
            if self.n_cycles:
                par = (self.M @ cross.T.astype(np.int32)) & 1
            else:
                par = np.zeros((0, len(part)), dtype=np.int64)
            for k in range(len(part)):
                keys.append(self._key(par[:, k]))
            flags.extend(bool(f) for f in on_edge)
        return keys, flags

    def locate_many(self, pts: Sequence[Point]) -> list[Location]:
        keys, flags = self.signatures(pts)
        vset = None
        out = []
        for p, key, flag in zip(pts, keys, flags):
            label = self.table.get(key)
            if label is None:
                raise InvalidFaces(f"point {p} lies in a region with no labelled face")
            if not flag:
                if vset is None:
                    vset = set(self.G.vertices)
                flag = p in vset
            out.append(Location(label, flag))
        return out


def brute_locate(G: Subdivision, p: Point) -> Location:
    """Face containing p; on an edge or vertex some incident face is returned and flagged."""
    return G._locator.locate_many([p])[0]


def brute_locate_many(G: Subdivision, pts: Sequence[Point]) -> list[Location]:
    return G._locator.locate_many(list(pts))


def triangle_face_classification(G: Subdivision, t: Triangle) -> FaceClass:
    """single(label) when no edge or vertex of G meets the open interior of t."""
    arr = G._arrays
    tv = points_to_array(list(t))
    tlo, thi = tv.min(axis=0), tv.max(axis=0)
    pad = _REL * arr.scale
    if len(arr.segments):
        cand = np.nonzero(np.all(arr.lo <= thi + pad, axis=1) & np.all(arr.hi >= tlo - pad, axis=1))[0]
        for ei in cand:
            if segment_meets_open_triangle(arr.segments[ei], t):
                return FaceClass(False, None)
    if len(G.vertices):
        vc = np.nonzero(np.all(arr.verts <= thi + pad, axis=1) & np.all(arr.verts >= tlo - pad, axis=1))[0]
        for vi in vc:
            if t.contains_strictly(G.vertices[vi]):
                return FaceClass(False, None)
    return FaceClass(True, brute_locate(G, t.centroid()).label)


# ---------------------------------------------------------------------------
# validation

def _candidate_pairs(lo: np.ndarray, hi: np.ndarray, pad: float):
    """Pairs of boxes that may overlap, by uniform-grid bucketing."""
    m = len(lo)
    if m < 2:
        return set()
    glo, ghi = lo.min(axis=0), hi.max(axis=0)
    span = np.maximum(ghi - glo, 1e-300)
    g = max(1, int(math.sqrt(m)))
    cell = span / g
    buckets = defaultdict(list)
    i0 = np.floor((lo - pad - glo) / cell).astype(int).clip(0, g - 1)
    i1 = np.floor((hi + pad - glo) / cell).astype(int).clip(0, g - 1)
    for k in range(m):
        for cx in range(i0[k, 0], i1[k, 0] + 1):
            for cy in range(i0[k, 1], i1[k, 1] + 1):
                buckets[cx, cy].append(k)
    pairs = set()
    for members in buckets.values():
        for x in range(len(members)):
            a = members[x]
            for y in range(x + 1, len(members)):
                b = members[y]
                if np.all(lo[a] <= hi[b] + pad) and np.all(lo[b] <= hi[a] + pad):
                    pairs.add((a, b) if a < b else (b, a))
    return pairs


def _validate(G: Subdivision) -> None:
    if len(set(G.vertices)) != len(G.vertices):
        raise ParseError("duplicate vertices")
    seen = set()
    for i, j in G.edges:
        if not (0 <= i < G.n and 0 <= j < G.n):
            raise ParseError(f"edge ({i}, {j}) references a missing vertex")
        if i == j:
            raise ParseError(f"zero-length edge at vertex {i}")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ParseError(f"duplicate edge {key}")
        seen.add(key)
    labels = [f.label for f in G.faces]
    if len(set(labels)) != len(labels):
        raise InvalidFaces("face labels must be unique")
    if not G.faces:
        raise InvalidFaces("at least one (outer) face is required")
    arr = G._arrays
    pad = _REL * arr.scale
    segs = arr.segments
    for a, b in sorted(_candidate_pairs(arr.lo, arr.hi, pad)):
        if not touches_at_endpoints_only(segs[a], segs[b]):
            raise NonPlanarInput(f"edges {G.edges[a]} and {G.edges[b]} intersect improperly")
    # isolated vertices lying on an edge
    endpoint = {i for e in G.edges for i in e}
    for vi, v in enumerate(G.vertices):
        if vi in endpoint:
            continue
        for ei, s in enumerate(segs):
            if point_on_segment(v, s):
                raise NonPlanarInput(f"vertex {vi} lies on edge {G.edges[ei]}")
    loc = G._locator
    expected = len(G.edges) - G.n + loc.components + 1
    if len(G.faces) != expected:
        raise InvalidFaces(f"{len(G.faces)} faces given but the edge graph has {expected}")
    if loc.outer_label is None:
        raise InvalidFaces("no face is the unbounded one")


# ---------------------------------------------------------------------------
# file format

def subdivision_to_dict(G: Subdivision) -> dict:
    return {
        "vertices": [[str(p.x), str(p.y)] for p in G.vertices],
        "edges": [[i, j] for i, j in G.edges],
        "faces": [{"label": f.label, "point": [str(f.point.x), str(f.point.y)]} for f in G.faces],
    }


def subdivision_from_dict(data: dict) -> Subdivision:
    try:
        verts = [point(str(x), str(y)) for x, y in data["vertices"]]
        edges = [(int(i), int(j)) for i, j in data["edges"]]
        faces = [Face(str(f["label"]), point(str(f["point"][0]), str(f["point"][1]))) for f in data["faces"]]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed subdivision: {exc}") from exc
    return Subdivision(verts, edges, faces)


def load_subdivision(path) -> Subdivision:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return subdivision_from_dict(data)


def save_subdivision(G: Subdivision, path) -> None:
    Path(path).write_text(json.dumps(subdivision_to_dict(G), indent=1) + "\n")


# ---------------------------------------------------------------------------
# normalization

MARGIN_LO = mpq(1, 8)
MARGIN_HI = mpq(7, 8)


@dataclass(frozen=True)
class AffineTransform:
    """p -> scale * p + (tx, ty), scale > 0."""

    scale: mpq
    tx: mpq
    ty: mpq

    def apply(self, p: Point) -> Point:
        return Point(self.scale * p.x + self.tx, self.scale * p.y + self.ty)

    def invert(self, p: Point) -> Point:
        return Point((p.x - self.tx) / self.scale, (p.y - self.ty) / self.scale)

    @property
    def is_identity(self) -> bool:
        return self.scale == 1 and self.tx == 0 and self.ty == 0

    def to_dict(self) -> dict:
        return {"scale": str(self.scale), "tx": str(self.tx), "ty": str(self.ty)}

    @classmethod
    def from_dict(cls, d) -> "AffineTransform":
        return cls(to_q(d["scale"]), to_q(d["tx"]), to_q(d["ty"]))


IDENTITY = AffineTransform(mpq(1), mpq(0), mpq(0))


def transform_subdivision(G: Subdivision, tr: AffineTransform) -> Subdivision:
    return Subdivision([tr.apply(p) for p in G.vertices], G.edges,
                       [Face(f.label, tr.apply(f.point)) for f in G.faces], validate=False)


def transform_measure(D: MeasureSpec, tr: AffineTransform) -> MeasureSpec:
    return MeasureSpec([Component(Triangle(*(tr.apply(v) for v in c.triangle)), c.weight)
                        for c in D.components])


def normalize_unit_square(G: Subdivision, D: MeasureSpec):
    """Scale and translate G and D together into the unit square.

    Inputs already inside [0, 1]^2 are left alone; otherwise the joint bounding
    box is mapped uniformly into [1/8, 7/8]^2.
    """
    pts = list(G.vertices) + D.support_points()
    x0 = min(p.x for p in pts)
    y0 = min(p.y for p in pts)
    x1 = max(p.x for p in pts)
    y1 = max(p.y for p in pts)
    if x0 >= 0 and y0 >= 0 and x1 <= 1 and y1 <= 1:
        tr = IDENTITY
        return G, D, tr
    side = max(x1 - x0, y1 - y0)
    s = (MARGIN_HI - MARGIN_LO) / side
    tr = AffineTransform(s, MARGIN_LO - s * x0, MARGIN_LO - s * y0)
    return transform_subdivision(G, tr), transform_measure(D, tr), tr
