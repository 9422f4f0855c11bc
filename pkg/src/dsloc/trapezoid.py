"""Backup point location: randomized incremental trapezoidal map with a search DAG.

All comparisons are exact.  Points are ordered lexicographically by (x, y),
which is a symbolic shear: no two distinct points share an abscissa, and
vertical segments become infinitesimally tilted.  Trapezoids whose two
vertical walls sit on the same real abscissa have zero area ("slivers") but
still catch queries lying exactly on that vertical line.

Query cost is the number of internal DAG nodes visited plus the four
comparisons of the bounding-box test.
"""
from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import Point, Segment, orient, rectangle
from .subdivision import Subdivision, brute_locate_many

_X, _Y, _LEAF = 0, 1, 2


class Trapezoid:
    __slots__ = ("top", "bottom", "leftp", "rightp", "ul", "ll", "ur", "lr", "node", "label", "dead")

    def __init__(self, top: Segment, bottom: Segment, leftp: Point, rightp: Point):
        self.top, self.bottom, self.leftp, self.rightp = top, bottom, leftp, rightp
        self.ul = self.ll = self.ur = self.lr = None
        self.node = None
        self.label = None
        self.dead = False

    def is_sliver(self) -> bool:
        return self.leftp.x == self.rightp.x

    def area(self):
        if self.is_sliver():
            return 0
        xl, xr = self.leftp.x, self.rightp.x
        hl = _y_at(self.top, xl) - _y_at(self.bottom, xl)
        hr = _y_at(self.top, xr) - _y_at(self.bottom, xr)
        return (xr - xl) * (hl + hr) / 2

    def sample_point(self) -> Point:
        """A point of the trapezoid off every segment (when one exists)."""
        if not self.is_sliver():
            xm = (self.leftp.x + self.rightp.x) / 2
            return Point(xm, (_y_at(self.top, xm) + _y_at(self.bottom, xm)) / 2)
        x = self.leftp.x
        lo, hi = self.leftp.y, self.rightp.y
        for s, is_top in ((self.top, True), (self.bottom, False)):
            if s.a.x != s.b.x:
                y = _y_at(s, x)
                if is_top:
                    hi = min(hi, y)
                else:
                    lo = max(lo, y)
        return Point(x, (lo + hi) / 2)


class _Node:
    __slots__ = ("kind", "pt", "seg", "left", "right", "trap")

    def __init__(self, kind, pt=None, seg=None, left=None, right=None, trap=None):
        self.kind, self.pt, self.seg, self.left, self.right, self.trap = kind, pt, seg, left, right, trap


def _y_at(s: Segment, x):
    a, b = s
    if a.x == b.x:
        return a.y
    return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x)


def _oriented(s: Segment) -> Segment:
    return s if s.a < s.b else Segment(s.b, s.a)


@dataclass
class LocateResult:
    label: str
    comparisons: int
    depth: int


class TrapezoidalMap:
    def __init__(self, segments: Sequence[Segment], box: tuple, seed: int):
        x0, y0, x1, y1 = box
        self.box = box
        self.seed = seed
        bottom = Segment(Point(x0, y0), Point(x1, y0))
        top = Segment(Point(x0, y1), Point(x1, y1))
        t0 = Trapezoid(top, bottom, Point(x0, y0), Point(x1, y1))
        self.root = _Node(_LEAF, trap=t0)
        t0.node = self.root
        segs = [_oriented(s) for s in segments]
        order = np.random.default_rng(seed).permutation(len(segs)) if segs else []
        self.order = [int(k) for k in order]
        for k in self.order:
            self._insert(segs[k])
        self.segments = segs
        self.trapezoids = self._collect()
        self.outer_label = None

    # -- search ---------------------------------------------------------
    def _find_for_insert(self, p: Point, q: Point) -> Trapezoid:
        node = self.root
        while node.kind != _LEAF:
            if node.kind == _X:
                node = node.right if p >= node.pt else node.left
            else:
                s = node.seg
                o = orient(s.a, s.b, p)
                if o == 0:
                    o = orient(s.a, s.b, q)
                    if o == 0:
                        raise ValueError(f"overlapping collinear segments at {p}")
                node = node.left if o > 0 else node.right
        return node.trap

    def locate_trapezoid(self, p: Point) -> tuple[Trapezoid, int]:
        node = self.root
        depth = 0
        while node.kind != _LEAF:
            depth += 1
            if node.kind == _X:
                node = node.right if p >= node.pt else node.left
            else:
                s = node.seg
                node = node.left if orient(s.a, s.b, p) > 0 else node.right
        return node.trap, depth

    # -- insertion ------------------------------------------------------
    def _insert(self, s: Segment):
        p, q = s
        d = self._find_for_insert(p, q)
        crossed = [d]
        while q > d.rightp:
            o = orient(p, q, d.rightp)
            if o == 0:
                raise ValueError(f"segment {s} passes through vertex {d.rightp}")
            d = d.lr if o > 0 else d.ur
            crossed.append(d)
        first, last = crossed[0], crossed[-1]
        new = []
        A = B = None
        if p > first.leftp:
            A = Trapezoid(first.top, first.bottom, first.leftp, p)
            new.append(A)
        if q < last.rightp:
            B = Trapezoid(last.top, last.bottom, q, last.rightp)
            new.append(B)
        uppers, lowers = [], []
        up = Trapezoid(first.top, s, p, None)
        lo = Trapezoid(s, first.bottom, p, None)
        for i, d in enumerate(crossed):
            uppers.append(up)
            lowers.append(lo)
            if i == len(crossed) - 1:
                up.rightp = lo.rightp = q
                break
            w = d.rightp
            if orient(p, q, w) > 0:  # wall above s survives, lower part continues
                up.rightp = w
                new.append(up)
                up = Trapezoid(crossed[i + 1].top, s, w, None)
            else:
                lo.rightp = w
                new.append(lo)
                lo = Trapezoid(s, crossed[i + 1].bottom, w, None)
        new.append(up)
        new.append(lo)
        # DAG surgery: each crossed leaf becomes a small subtree
        for i, d in enumerate(crossed):
            leafU, leafL = uppers[i].node, lowers[i].node
            if leafU is None:
                leafU = uppers[i].node = _Node(_LEAF, trap=uppers[i])
            if leafL is None:
                leafL = lowers[i].node = _Node(_LEAF, trap=lowers[i])
            ynode = _Node(_Y, seg=s, left=leafU, right=leafL)
            sub = ynode
            if i == len(crossed) - 1 and B is not None:
                if B.node is None:
                    B.node = _Node(_LEAF, trap=B)
                sub = _Node(_X, pt=q, left=sub, right=B.node)
            if i == 0 and A is not None:
                A.node = _Node(_LEAF, trap=A)
                sub = _Node(_X, pt=p, left=A.node, right=sub)
            n = d.node
            n.kind, n.pt, n.seg, n.left, n.right, n.trap = sub.kind, sub.pt, sub.seg, sub.left, sub.right, None
            d.dead = True
        # neighbour repair by local matching
        pool = list(new)
        seen = set(map(id, new))
        for d in crossed:
            for nb in (d.ul, d.ll, d.ur, d.lr):
                if nb is not None and not nb.dead and id(nb) not in seen:
                    seen.add(id(nb))
                    pool.append(nb)
        for X in new:
            X.ul = X.ll = X.ur = X.lr = None
        for X in pool:
            fresh = X in new
            for Y in new if not fresh else pool:
                if Y is X:
                    continue
                if Y.rightp == X.leftp:
                    if Y.top == X.top and (fresh or X.ul is None or X.ul.dead):
                        X.ul = Y
                    if Y.bottom == X.bottom and (fresh or X.ll is None or X.ll.dead):
                        X.ll = Y
                if Y.leftp == X.rightp:
                    if Y.top == X.top and (fresh or X.ur is None or X.ur.dead):
                        X.ur = Y
                    if Y.bottom == X.bottom and (fresh or X.lr is None or X.lr.dead):
                        X.lr = Y
            if not fresh:
                for name in ("ul", "ll", "ur", "lr"):
                    nb = getattr(X, name)
                    if nb is not None and nb.dead:
                        setattr(X, name, None)

    def _collect(self) -> list[Trapezoid]:
        out, seen = [], set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if node.kind == _LEAF:
                out.append(node.trap)
            else:
                stack.append(node.right)
                stack.append(node.left)
        return out

    # -- stats ----------------------------------------------------------
    def area(self):
        return sum((t.area() for t in self.trapezoids), 0)

    def box_area(self):
        x0, y0, x1, y1 = self.box
        return (x1 - x0) * (y1 - y0)

    def dag_size(self) -> int:
        seen, stack = set(), [self.root]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                continue
            seen.add(id(node))
            if node.kind != _LEAF:
                stack.extend((node.left, node.right))
        return len(seen)

    def max_depth(self) -> int:
        best = {}

        def depth(node):
            if node.kind == _LEAF:
                return 0
            k = id(node)
            if k not in best:
                best[k] = 1 + max(depth(node.left), depth(node.right))
            return best[k]

        old = sys.getrecursionlimit()
        sys.setrecursionlimit(max(old, 100000))
        try:
            return depth(self.root)
        finally:
            sys.setrecursionlimit(old)

    def stats(self) -> dict:
        return {"trapezoids": len(self.trapezoids), "segments": len(self.segments),
                "dag_nodes": self.dag_size(), "seed": self.seed,
                "trapezoid_bound": 3 * len(self.segments) + 1}


def backup_box(G: Subdivision) -> tuple:
    if G.vertices:
        x0, y0, x1, y1 = G.bounding_box()
    else:
        x0 = y0 = x1 = y1 = 0
    lo, hi = min(x0, y0) - 1, max(x1, y1) + 1
    return (lo, lo, hi, hi)


def build_backup(G: Subdivision, seed: int = 0) -> TrapezoidalMap:
    """Trapezoidal map of G's edges inside a padded box; every trapezoid labelled by its face."""
    M = TrapezoidalMap(G.segments(), backup_box(G), seed)
    locs = brute_locate_many(G, [t.sample_point() for t in M.trapezoids])
    for t, loc in zip(M.trapezoids, locs):
        t.label = loc.label
    M.outer_label = G.outer_label
    return M


def backup_locate(M: TrapezoidalMap, p: Point) -> LocateResult:
    """Face label of p; points on a segment resolve to the face below it (in sheared order)."""
    x0, y0, x1, y1 = M.box
    if not (x0 <= p.x <= x1 and y0 <= p.y <= y1):
        return LocateResult(M.outer_label, 4, 0)
    t, depth = M.locate_trapezoid(p)
    return LocateResult(t.label, 4 + depth, depth)


def box_polygon(M: TrapezoidalMap):
    return rectangle(*M.box)
