"""Per-node scaffolding: low-crossing spanning tree, segment arrangement, Steiner triangulation.

The tree is grown greedily under multiplicative weights on the test lines.
The arrangement splits every segment at every contact and walks faces by
angular next-edge traversal, so spurs from degree-one tree vertices show up
as repeated vertices in a (weakly simple) boundary walk.  Faces are
triangulated by balanced recursive splitting along diagonals, inserting a
Steiner point at an edge midpoint when no balanced diagonal exists.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import minimum_spanning_tree

from . import testlines
from .geometry import (ConvexPolygon, DegenerateGeometry, Point, Segment, Triangle, line_intersection, orient,
                       point_on_segment, points_to_array, polygon_signed_area2, rectangle,
                       touches_at_endpoints_only)
from .simplicial import PartitionSequence


class DegenerateFace(ValueError):
    pass


# ---------------------------------------------------------------------------
# spanning tree

@dataclass
class SpanningTree:
    points: tuple[Point, ...]
    edges: tuple[tuple[int, int], ...]

    def segments(self) -> list[Segment]:
        return [Segment(self.points[i], self.points[j]) for i, j in self.edges]

    def is_spanning_tree(self) -> bool:
        n = len(self.points)
        if len(self.edges) != n - 1:
            return False
        parent = list(range(n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for i, j in self.edges:
            ri, rj = find(i), find(j)
            if ri == rj:
                return False
            parent[ri] = rj
        return True

    def crossing_report(self) -> testlines.CrossingResult:
        return testlines.max_crossings(list(self.points), list(self.edges))


def tree_crossing_budget(n: int) -> float:
    return 4.0 * math.sqrt(n) * math.log(n + 1)


def _candidate_pairs(F: np.ndarray, knn: int) -> list[tuple[int, int]]:
    n = len(F)
    if n <= 96:
        return [(i, j) for i in range(n) for j in range(i + 1, n)]
    d = np.sqrt(((F[:, None, :] - F[None, :, :]) ** 2).sum(-1))
    pairs = set()
    order = np.argsort(d, axis=1, kind="stable")[:, 1:knn + 1]
    for i in range(n):
        for j in order[i]:
            pairs.add((min(i, int(j)), max(i, int(j))))
    mst = minimum_spanning_tree(sparse.csr_matrix(d)).tocoo()
    for i, j in zip(mst.row, mst.col):
        pairs.add((min(int(i), int(j)), max(int(i), int(j))))
    return sorted(pairs)


def spanning_tree_low_crossing(V: Sequence[Point], knn: int = 12) -> SpanningTree:
    """Greedy multiplicative-weights spanning tree over the vertex-pair test lines.

    Each step joins two components with the candidate segment of least total
    weight of test lines strictly separating its endpoints, then doubles the
    weight of every line it crosses.  Ties go to the lexicographically
    smallest segment, so the result is deterministic.
    """
    pts = list(V)
    if len(set(pts)) != len(pts):
        raise DegenerateGeometry("spanning tree points must be distinct")
    n = len(pts)
    if n < 2:
        return SpanningTree(tuple(pts), ())
    order = sorted(range(n), key=lambda k: pts[k])
    pts = [pts[k] for k in order]  # lexicographic point order makes tie-breaking canonical
    F = points_to_array(pts)
    I, J, S = testlines.sign_matrix(pts, F)
    cand = _candidate_pairs(F, knn)
    A = np.array([a for a, _ in cand])
    B = np.array([b for _, b in cand])
    blocks = []
    step = max(1, 2_000_000 // max(1, len(I)))
    for s in range(0, len(cand), step):
        blk = (S[:, A[s:s + step]].astype(np.int16) * S[:, B[s:s + step]]) < 0
        blocks.append(sparse.csr_matrix(blk.T.astype(np.float64)))
    X = sparse.vstack(blocks).tocsr()
    w = np.ones(len(I))
    comp = np.arange(n)
    edges = []
    for _ in range(n - 1):
        cost = X @ w
        cost[comp[A] == comp[B]] = np.inf
        c = int(np.argmin(cost))
        a, b = int(A[c]), int(B[c])
        edges.append((a, b))
        old, new = comp[b], comp[a]
        comp[comp == old] = new
        row = X.getrow(c)
        w[row.indices] *= 2.0
    # back to the caller's indexing
    out_edges = tuple(sorted((min(order[a], order[b]), max(order[a], order[b])) for a, b in edges))
    return SpanningTree(tuple(V), out_edges)


# ---------------------------------------------------------------------------
# arrangement

@dataclass
class Arrangement:
    segments: list[Segment]
    vertices: list[Point]
    edges: list[tuple[int, int]]
    faces: list[list[int]]
    outer: int

    def face_walk(self, k: int) -> list[Point]:
        return [self.vertices[i] for i in self.faces[k]]

    def bounded_faces(self) -> list[int]:
        return [k for k in range(len(self.faces)) if k != self.outer]

    def euler_ok(self) -> bool:
        return len(self.vertices) - len(self.edges) + len(self.faces) == 2

    def face_area(self, k: int):
        return polygon_signed_area2(self.face_walk(k)) / 2


def _split_points(segs: list[Segment]) -> list[list[Point]]:
    on = [[s.a, s.b] for s in segs]
    boxes = [(min(s.a.x, s.b.x), min(s.a.y, s.b.y), max(s.a.x, s.b.x), max(s.a.y, s.b.y)) for s in segs]
    for i in range(len(segs)):
        a, b = segs[i]
        bi = boxes[i]
        for j in range(i + 1, len(segs)):
            bj = boxes[j]
            if bi[2] < bj[0] or bj[2] < bi[0] or bi[3] < bj[1] or bj[3] < bi[1]:
                continue
            c, d = segs[j]
            o1, o2 = orient(a, b, c), orient(a, b, d)
            o3, o4 = orient(c, d, a), orient(c, d, b)
            if o1 * o2 < 0 and o3 * o4 < 0:
                p = line_intersection(a, b, c, d)
                on[i].append(p)
                on[j].append(p)
                continue
            for p, o in ((c, o1), (d, o2)):
                if o == 0 and point_on_segment(p, segs[i]):
                    on[i].append(p)
            for p, o in ((a, o3), (b, o4)):
                if o == 0 and point_on_segment(p, segs[j]):
                    on[j].append(p)
    return on


def _angle_cmp(u, v) -> int:
    hu = 0 if (u[1] > 0 or (u[1] == 0 and u[0] > 0)) else 1
    hv = 0 if (v[1] > 0 or (v[1] == 0 and v[0] > 0)) else 1
    if hu != hv:
        return hu - hv
    c = u[0] * v[1] - u[1] * v[0]
    return -1 if c > 0 else (1 if c < 0 else 0)


def build_arrangement(segments: Sequence[Segment]) -> Arrangement:
    """Planar arrangement of segments with every contact point as a vertex; faces as boundary walks."""
    segs = []
    seen = set()
    for s in segments:
        key = tuple(sorted(s))
        if s.a == s.b or key in seen:
            continue
        seen.add(key)
        segs.append(Segment(*key))
    on = _split_points(segs)
    index: dict[Point, int] = {}
    verts: list[Point] = []
    edge_set = set()
    for pts in on:
        pts = sorted(set(pts))
        ids = []
        for p in pts:
            k = index.get(p)
            if k is None:
                k = index[p] = len(verts)
                verts.append(p)
            ids.append(k)
        for u, v in zip(ids, ids[1:]):
            edge_set.add((min(u, v), max(u, v)))
    edges = sorted(edge_set)
    adj: dict[int, list[int]] = {i: [] for i in range(len(verts))}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    pos = {}
    for u, nb in adj.items():
        pu = verts[u]
        nb.sort(key=functools.cmp_to_key(
            lambda a, b: _angle_cmp((verts[a].x - pu.x, verts[a].y - pu.y), (verts[b].x - pu.x, verts[b].y - pu.y))))
        for k, v in enumerate(nb):
            pos[u, v] = k
    used = set()
    faces = []
    for u, v in edges:
        for start in ((u, v), (v, u)):
            if start in used:
                continue
            walk = []
            he = start
            while he not in used:
                used.add(he)
                a, b = he
                walk.append(a)
                nb = adj[b]
                c = nb[(pos[b, a] - 1) % len(nb)]
                he = (b, c)
            faces.append(walk)
    areas = [polygon_signed_area2([verts[i] for i in f]) for f in faces]
    outer = min(range(len(faces)), key=lambda k: areas[k]) if faces else -1
    return Arrangement(segs, verts, edges, faces, outer)


# ---------------------------------------------------------------------------
# Steiner triangulation of a single face walk

def _ang_half(d1, u):
    c = d1[0] * u[1] - d1[1] * u[0]
    if c > 0:
        return 0
    if c == 0 and d1[0] * u[0] + d1[1] * u[1] > 0:
        return 0
    return 1


def _ccw_before(d1, u, v) -> bool:
    """Is the CCW angle from d1 to u strictly smaller than to v?"""
    hu, hv = _ang_half(d1, u), _ang_half(d1, v)
    if hu != hv:
        return hu < hv
    return u[0] * v[1] - u[1] * v[0] > 0


def _same_dir(u, v) -> bool:
    return u[0] * v[1] - u[1] * v[0] == 0 and u[0] * v[0] + u[1] * v[1] > 0


def _in_wedge(walk: Sequence[Point], i: int, q: Point) -> bool:
    """Does direction walk[i] -> q point strictly into the face at walk position i (face on the left)?"""
    k = len(walk)
    cur, prv, nxt = walk[i], walk[i - 1], walk[(i + 1) % k]
    d1 = (nxt.x - cur.x, nxt.y - cur.y)
    d2 = (prv.x - cur.x, prv.y - cur.y)
    d = (q.x - cur.x, q.y - cur.y)
    if _same_dir(d, d1) or _same_dir(d, d2):
        return False
    if _same_dir(d1, d2):
        return True
    return _ccw_before(d1, d, d2)


def _diagonal_ok(walk: Sequence[Point], i: int, j: int) -> bool:
    k = len(walk)
    a, b = walk[i], walk[j]
    if a == b or (j - i) % k in (0, 1, k - 1):
        return False
    if not (_in_wedge(walk, i, b) and _in_wedge(walk, j, a)):
        return False
    diag = Segment(a, b)
    x0, x1 = min(a.x, b.x), max(a.x, b.x)
    y0, y1 = min(a.y, b.y), max(a.y, b.y)
    for e in range(k):
        p, q = walk[e], walk[(e + 1) % k]
        if (max(p.x, q.x) < x0 or min(p.x, q.x) > x1 or max(p.y, q.y) < y0 or min(p.y, q.y) > y1):
            continue
        if not touches_at_endpoints_only(diag, Segment(p, q)):
            return False
    return True


def _find_split(walk: Sequence[Point], limit: int):
    """Most balanced valid diagonal (i, j) with both parts holding at most ``limit`` walk vertices."""
    k = len(walk)
    best = None
    offsets = sorted(range(2, k - 1), key=lambda d: (max(d + 1, k - d + 1), d))
    for d in offsets:
        worst = max(d + 1, k - d + 1)
        if limit is not None and worst > limit:
            break
        for i in range(k):
            j = (i + d) % k
            if _diagonal_ok(walk, i, j):
                return i, j
    return best


def _split_walk(walk, i, j):
    if i > j:
        i, j = j, i
    return list(walk[i:j + 1]), list(walk[j:]) + list(walk[:i + 1])


def steiner_triangulate_face(walk: Sequence[Point]) -> tuple[list[Triangle], list[Point]]:
    """Balanced triangulation of a weakly simple CCW walk; returns triangles and Steiner points."""
    walk = list(walk)
    if polygon_signed_area2(walk) <= 0:
        raise DegenerateFace("face walk must enclose positive area counterclockwise")
    tris: list[Triangle] = []
    steiner: list[Point] = []
    stack = [walk]
    while stack:
        w = stack.pop()
        k = len(w)
        if k == 3:
            if orient(*w) <= 0:
                raise DegenerateFace(f"degenerate piece {w}")
            tris.append(Triangle(*w))
            continue
        limit = -(-2 * k // 3) + 1
        split = _find_split(w, limit)
        if split is None and k >= 6:
            for e in range(k):
                p, q = w[e], w[(e + 1) % k]
                m = Point((p.x + q.x) / 2, (p.y + q.y) / 2)
                w2 = w[:e + 1] + [m] + w[e + 1:]
                mi = e + 1
                k2 = len(w2)
                lim2 = -(-2 * k2 // 3) + 1
                for d in sorted(range(2, k2 - 1), key=lambda d: max(d + 1, k2 - d + 1)):
                    if max(d + 1, k2 - d + 1) > lim2:
                        break
                    j = (mi + d) % k2
                    if _diagonal_ok(w2, mi, j):
                        split = (mi, j)
                        break
                if split is not None:
                    w = w2
                    steiner.append(m)
                    break
        if split is None:
            split = _find_split(w, None)
        if split is None:
            raise DegenerateFace(f"no diagonal found for a walk of {k} vertices")
        a, b = _split_walk(w, *split)
        stack.append(a)
        stack.append(b)
    return tris, steiner


def triangle_edges(tris: Sequence[Triangle]) -> list[tuple[Point, Point]]:
    seen = {}
    for t in tris:
        for s in t.edges():
            seen.setdefault(tuple(sorted(s)), None)
    return list(seen)


def chord_crossings(tris: Sequence[Triangle], a: Point, b: Point) -> int:
    """Number of triangulation edges whose interior the open chord ab properly crosses."""
    n = 0
    for p, q in triangle_edges(tris):
        if orient(a, b, p) * orient(a, b, q) < 0 and orient(p, q, a) * orient(p, q, b) < 0:
            n += 1
    return n


# ---------------------------------------------------------------------------
# whole arrangement

@dataclass
class SteinerTriangulation:
    triangles: list[Triangle]
    steiner_points: list[Point]
    provenance: list[int]  # arrangement face of each triangle
    arrangement: Arrangement = field(repr=False)

    def area(self):
        return sum((t.area() for t in self.triangles), 0)

    def crossing_report(self) -> testlines.CrossingResult:
        edges = triangle_edges(self.triangles)
        W, items = testlines.index_items(edges)
        return testlines.max_crossings(W, items)


def enclosing_square(points: Sequence[Point]) -> ConvexPolygon:
    xs = [p.x for p in points]
    ys = [p.y for p in points]
    x0, y0 = min(xs), min(ys)
    side = max(max(xs) - x0, max(ys) - y0)
    return rectangle(x0, y0, x0 + side, y0 + side)


def vertex_set(seq: PartitionSequence, box: ConvexPolygon) -> list[Point]:
    """Distinct triangle corners followed by the box corners."""
    out = dict.fromkeys(v for t in seq.triangles for v in t)
    for v in box.vertices:
        out.setdefault(v, None)
    return list(out)


def triangulate_arrangement(seq: PartitionSequence, tree: SpanningTree, box: ConvexPolygon) -> SteinerTriangulation:
    """Arrangement of tree edges, partition triangles and box, with every bounded face triangulated."""
    segs = list(tree.segments())
    for t in seq.triangles:
        segs.extend(t.edges())
    bv = box.vertices
    segs.extend(Segment(bv[i], bv[(i + 1) % len(bv)]) for i in range(len(bv)))
    arr = build_arrangement(segs)
    tris, steiner, prov = [], [], []
    for f in arr.bounded_faces():
        ft, fs = steiner_triangulate_face(arr.face_walk(f))
        tris.extend(ft)
        steiner.extend(fs)
        prov.extend([f] * len(ft))
    return SteinerTriangulation(tris, steiner, prov, arr)


def stab_budget(r: int, c_cross: float = 4.0, c_stab: float = 6.0) -> float:
    return c_cross * math.sqrt(r) * (1 + math.log2(r)) * c_stab


def face_stab_budget(k: int, c_stab: float = 6.0) -> float:
    return c_stab * (1 + math.log2(k))
