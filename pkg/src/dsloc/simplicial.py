"""Simplicial partitions of point sets and of probability measures.

A partition is an ordered sequence of closed triangles; the i-th cell is the
i-th triangle minus everything covered earlier.  Point partitions come from a
pluggable constructor and are accepted only after exact verification.  Measure
partitions sample the measure, partition the sample, swap the last triangle
for one covering the support, and keep retrying until the exact cell masses
pass.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from gmpy2 import mpq

from . import testlines
from .geometry import (ZERO, ConvexPolygon, DegenerateGeometry, HalfPlane, Point, Triangle, clip_convex,
                       line_intersection, orient_sign_matrix, point, points_to_array, rectangle)
from .measure import MeasureSpec, prob_polygon, sample_conditional_many, support_covering_triangle


class PartitionFailed(RuntimeError):
    pass


@dataclass(frozen=True)
class PartitionSequence:
    triangles: tuple[Triangle, ...]

    def __post_init__(self):
        object.__setattr__(self, "triangles", tuple(self.triangles))

    @property
    def r(self) -> int:
        return len(self.triangles)

    def vertices(self) -> list[Point]:
        seen = {}
        for t in self.triangles:
            for v in t:
                seen.setdefault(v, None)
        return list(seen)

    def first_cover(self, p: Point) -> int | None:
        for i, t in enumerate(self.triangles):
            if t.contains(p):
                return i
        return None

    def to_dict(self) -> dict:
        return {"triangles": [[[str(v.x), str(v.y)] for v in t] for t in self.triangles]}

    @classmethod
    def from_dict(cls, d) -> "PartitionSequence":
        return cls(tuple(Triangle(*(point(x, y) for x, y in t)) for t in d["triangles"]))


@dataclass(frozen=True)
class EmpiricalMeasure:
    sample: tuple[Point, ...]

    def __post_init__(self):
        if not self.sample:
            raise ValueError("empirical measure needs at least one point")

    @property
    def m(self) -> int:
        return len(self.sample)

    def __call__(self, contains: Callable[[Point], bool]) -> mpq:
        return mpq(sum(1 for p in self.sample if contains(p)), self.m)


@dataclass
class VerificationReport:
    covers_all: bool
    max_incremental_mass: mpq  # point count for point sets, probability for measures
    max_line_crossings: int
    test_line_count: int
    incremental: list = field(default_factory=list)

    def row(self) -> dict:
        return {"covers_all": self.covers_all, "max_incremental_mass": str(self.max_incremental_mass),
                "max_line_crossings": self.max_line_crossings, "test_line_count": self.test_line_count}


def crossing_budget(r: int, c_cross: float = 4.0) -> float:
    """c * sqrt(r) * (1 + log2 r)."""
    return c_cross * math.sqrt(r) * (1.0 + math.log2(r)) if r >= 1 else 0.0


def point_count_bound(m: int, r: int) -> int:
    return -(-2 * m // r)


def paper_sample_size(r: int) -> int:
    """ceil(256 r^3 ln r); r = 1 needs no sample."""
    if r < 2:
        return 0
    return math.ceil(256 * r ** 3 * math.log(r))


# ---------------------------------------------------------------------------
# constructors

def _group_sizes(m: int, k: int) -> list[int]:
    base, extra = divmod(m, k)
    return [base + 1 if i < extra else base for i in range(k)]


def _grid_groups(S: Sequence[Point], k: int) -> list[list[Point]]:
    """Quantile slabs in x, each cut into quantile rows in y."""
    sizes = _group_sizes(len(S), k)
    cols = max(1, math.isqrt(k))
    per_col = [k // cols + (1 if c < k % cols else 0) for c in range(cols)]
    by_x = sorted(S)
    groups, gi, pos = [], 0, 0
    for c in range(cols):
        gs = sizes[gi:gi + per_col[c]]
        col = sorted(by_x[pos:pos + sum(gs)], key=lambda p: (p.y, p.x))
        pos += sum(gs)
        q = 0
        for g in gs:
            groups.append(col[q:q + g])
            q += g
        gi += per_col[c]
    return groups


def _kd_groups(S: Sequence[Point], k: int, axis: int = 0) -> list[list[Point]]:
    """Alternating-axis median splits with group counts k//2 and k - k//2."""
    if k == 1:
        return [list(S)]
    k1 = k // 2
    sizes = _group_sizes(len(S), k)
    n1 = sum(sizes[:k1])
    key = (lambda p: (p.x, p.y)) if axis == 0 else (lambda p: (p.y, p.x))
    srt = sorted(S, key=key)
    return _kd_groups(srt[:n1], k1, 1 - axis) + _kd_groups(srt[n1:], k - k1, 1 - axis)


GROUPERS = {"grid": _grid_groups, "kd": _kd_groups}
STRATEGIES = ("trim", "grid", "kd", "ham")

# cut directions are integer normals of this magnitude, so cut lines stay exact and small
_NORMAL_SCALE = 1 << 20


def _normal(theta: float) -> tuple[int, int]:
    return round(math.cos(theta) * _NORMAL_SCALE), round(math.sin(theta) * _NORMAL_SCALE)


def _quantile_cut(S: Sequence[Point], a: int, b: int, frac: Fraction) -> mpq:
    """Exact c such that about frac of S lies strictly below a x + b y = c."""
    vals = sorted(a * p.x + b * p.y for p in S)
    j = min(max(1, round(len(vals) * frac)), len(vals) - 1)
    return (vals[j - 1] + vals[j]) / 2


def _ham_sandwich_angle(A: Sequence[Point], B: Sequence[Point]) -> float:
    """Angle of a normal whose A-halving line also halves B.

    The imbalance of B about the A-median line flips sign when the normal
    turns by half a circle, so bisection on the angle finds a zero crossing.
    The search runs in floating point; the cut itself is made exact later.
    """
    FA, FB = points_to_array(A), points_to_array(B)

    def imbalance(theta):
        n = np.array([math.cos(theta), math.sin(theta)])
        c = np.median(FA @ n)
        pb = FB @ n
        return int(np.sum(pb > c)) - int(np.sum(pb < c))

    lo, hi = 0.0, math.pi
    f_lo = imbalance(lo)
    best = (abs(f_lo), lo)
    for _ in range(48):
        if f_lo == 0:
            break
        mid = (lo + hi) / 2
        f_mid = imbalance(mid)
        best = min(best, (abs(f_mid), mid))
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return best[1]


def _cut(poly: ConvexPolygon, S: Sequence[Point], a: int, b: int, c: mpq):
    below = HalfPlane(mpq(-a), mpq(-b), c)  # a x + b y <= c
    lo = [p for p in S if a * p.x + b * p.y < c]
    hi = [p for p in S if a * p.x + b * p.y >= c]
    return (clip_convex(poly, below), lo), (clip_convex(poly, below.complement()), hi)


def _halving_normal(S: Sequence[Point]) -> tuple[int, int]:
    """Slightly tilted axis normal across the wider spread, so ties on a grid still split."""
    F = points_to_array(S)
    span = F.max(axis=0) - F.min(axis=0)
    return (_NORMAL_SCALE, 1) if span[0] >= span[1] else (1, _NORMAL_SCALE)


def _ham_cells(poly: ConvexPolygon, S: list[Point], k: int) -> list[ConvexPolygon]:
    """k convex cells of poly holding about |S|/k points each."""
    if k == 1 or len(S) < 2 or poly.is_empty:
        return [poly] if not poly.is_empty else []
    if k % 4 == 0 and len(S) >= 4:
        a, b = _halving_normal(S)
        (p1, s1), (p2, s2) = _cut(poly, S, a, b, _quantile_cut(S, a, b, Fraction(1, 2)))
        if s1 and s2:
            a2, b2 = _normal(_ham_sandwich_angle(s1, s2))
            out = []
            for pc, sc in ((p1, s1), (p2, s2)):
                (q1, t1), (q2, t2) = _cut(pc, sc, a2, b2, _quantile_cut(sc, a2, b2, Fraction(1, 2)))
                out += _ham_cells(q1, t1, k // 4) + _ham_cells(q2, t2, k // 4)
            return out
    k1 = k // 2
    a, b = _halving_normal(S)
    (p1, s1), (p2, s2) = _cut(poly, S, a, b, _quantile_cut(S, a, b, Fraction(k1, k)))
    return _ham_cells(p1, s1, k1) + _ham_cells(p2, s2, k - k1)


def _construct_ham(S: Sequence[Point], r: int, pad) -> PartitionSequence:
    """Halving line plus ham-sandwich cut, recursively; cells clipped to the bounding square and fanned.

    Each cell of the final subdivision is fan-triangulated, so the sequence
    usually holds more than r triangles.  Cells are emitted one after another.
    """
    x0, y0, x1, y1 = _box(S, pad)
    side = max(x1 - x0, y1 - y0) + 2 * pad
    square = rectangle(x0 - pad, y0 - pad, x0 - pad + side, y0 - pad + side)
    tris: list[Triangle] = []
    for cell in _ham_cells(square, list(S), r):
        tris.extend(cell.fan())
    return PartitionSequence(tris)


def _box(group: Sequence[Point], pad: mpq):
    x0 = min(p.x for p in group)
    x1 = max(p.x for p in group)
    y0 = min(p.y for p in group)
    y1 = max(p.y for p in group)
    if x0 == x1:
        x0, x1 = x0 - pad, x1 + pad
    if y0 == y1:
        y0, y1 = y0 - pad, y1 + pad
    return x0, y0, x1, y1


def _box_triangles(x0, y0, x1, y1) -> list[Triangle]:
    return [Triangle(Point(x0, y0), Point(x1, y0), Point(x1, y1)),
            Triangle(Point(x0, y0), Point(x1, y1), Point(x0, y1))]


def _box_cover(x0, y0, x1, y1) -> Triangle:
    w, h = x1 - x0, y1 - y0
    return Triangle(Point(x0, y0), Point(x0 + 2 * w, y0), Point(x0, y0 + 2 * h))


def _snug_cover(x0, y0, x1, y1) -> Triangle:
    """Isosceles triangle of area 2wh whose sides pass through the box's top corners."""
    w, h = x1 - x0, y1 - y0
    return Triangle(Point(x0 - w / 2, y0), Point(x1 + w / 2, y0), Point((x0 + x1) / 2, y1 + h))


def _by_median_distance(S: Sequence[Point]) -> list[Point]:
    """S ordered by L-infinity distance from the coordinatewise median, ties lexicographic."""
    F = points_to_array(S)
    med = np.median(F, axis=0)
    d = np.abs(F - med).max(axis=1)
    order = sorted(range(len(S)), key=lambda i: (d[i], S[i]))
    return [S[i] for i in order]


def _construct_trimmed(S: Sequence[Point], r: int, pad) -> PartitionSequence:
    """Boxes around the core of S only; the farthest points fall to the final covering triangle.

    Points are ranked by distance from the median.  The nearest ones are cut
    into groups of at most ceil(2m/r) points, each bounded by a box split into
    two triangles.  With r even, one spare triangle is a snug halo around all
    but the farthest ceil(m/r) points, so each of the last two cells also
    receives at most ceil(2m/r) points.
    """
    m = len(S)
    ranked = _by_median_distance(S)
    cover = _box_cover(*_box(S, pad))
    g = (r - 1) // 2
    if r % 2:
        core = ranked[:m - -(-m // r)]
        halo = []
    else:
        core = ranked[:m - -(-2 * m // r)]
        halo = [_snug_cover(*_box(ranked[:m - -(-m // r)], pad))]
    tris: list[Triangle] = []
    if g:
        for grp in _grid_groups(core, g):
            tris.extend(_box_triangles(*_box(grp, pad)))
    return PartitionSequence(tris + halo + [cover])


def construct_partition(S: Sequence[Point], r: int, strategy: str = "trim") -> PartitionSequence:
    """Unverified construction; every strategy is accepted only after the exact verifier passes it."""
    if r < 1:
        raise ValueError("r must be >= 1")
    span = max(max(p.x for p in S) - min(p.x for p in S), max(p.y for p in S) - min(p.y for p in S))
    pad = (span if span > 0 else mpq(1)) / (1 << 20)
    if r == 1:
        return PartitionSequence([_box_cover(*_box(S, pad))])
    if strategy == "trim":
        return _construct_trimmed(list(S), r, pad)
    if strategy == "ham":
        return _construct_ham(list(S), r, pad)
    k = -(-r // 2)
    groups = GROUPERS[strategy](list(S), k)
    tris: list[Triangle] = []
    for g in groups:
        box = _box(g, pad)
        if len(tris) + 2 <= r:
            tris.extend(_box_triangles(*box))
        else:
            tris.append(_box_cover(*box))
    return PartitionSequence(tris)


# ---------------------------------------------------------------------------
# verification

def assign_first_cover(S: Sequence[Point], seq: PartitionSequence, fp: np.ndarray | None = None) -> np.ndarray:
    """Index of the first closed triangle containing each point, -1 if none (exact)."""
    fp = points_to_array(S) if fp is None else fp
    owner = np.full(len(S), -1, dtype=np.int64)
    for ti, t in enumerate(seq.triangles):
        a = [t.v0, t.v1, t.v2]
        b = [t.v1, t.v2, t.v0]
        sg = orient_sign_matrix(a, b, S, fp=fp)
        inside = np.all(sg >= 0, axis=0) & (owner < 0)
        owner[inside] = ti
    return owner


def partition_crossings(seq: PartitionSequence) -> testlines.CrossingResult:
    W, items = testlines.index_items(seq.triangles)
    return testlines.max_crossings(W, items)


def verify_point_partition(S: Sequence[Point], seq: PartitionSequence, r: int | None = None) -> VerificationReport:
    """Exact check of coverage, incremental cell counts and test-line crossings."""
    owner = assign_first_cover(S, seq)
    counts = np.bincount(owner[owner >= 0], minlength=seq.r) if seq.r else np.zeros(0, dtype=np.int64)
    cr = partition_crossings(seq)
    return VerificationReport(
        covers_all=bool(np.all(owner >= 0)),
        max_incremental_mass=mpq(int(counts.max()) if len(counts) else 0),
        max_line_crossings=cr.max_crossings,
        test_line_count=cr.test_line_count,
        incremental=[int(c) for c in counts],
    )


def point_partition_ok(rep: VerificationReport, m: int, r: int, c_cross: float) -> bool:
    return (rep.covers_all and rep.max_incremental_mass <= point_count_bound(m, r)
            and rep.max_line_crossings <= crossing_budget(r, c_cross))


def build_point_partition(S: Sequence[Point], r: int, strategy: str = "trim", c_cross: float = 4.0,
                          log: list | None = None) -> PartitionSequence:
    """Verified point partition; falls back to the other strategies before giving up."""
    S = list(dict.fromkeys(S))
    if len(S) < r:
        raise PartitionFailed(f"need at least r = {r} distinct points, got {len(S)}")
    order = [strategy] + [s for s in STRATEGIES if s != strategy]
    for strat in order:
        try:
            seq = construct_partition(S, r, strat)
        except DegenerateGeometry:
            continue
        rep = verify_point_partition(S, seq, r)
        if log is not None:
            log.append({"stage": "points", "strategy": strat, **rep.row()})
        if point_partition_ok(rep, len(S), r, c_cross):
            return seq
    raise PartitionFailed(f"no strategy produced a valid partition for r = {r}")


# ---------------------------------------------------------------------------
# measures

def _slab_trapezoids(seq: PartitionSequence):
    """Vertical-slab trapezoids of the arrangement of all triangle edges, with an interior point each."""
    edges = {}
    for t in seq.triangles:
        for s in t.edges():
            a, b = sorted(s)
            if a.x != b.x:
                edges[(a, b)] = None
    edges = list(edges)
    xs = {v.x for t in seq.triangles for v in t}
    for i in range(len(edges)):
        a, b = edges[i]
        for j in range(i + 1, len(edges)):
            c, d = edges[j]
            if b.x <= c.x or d.x <= a.x:
                continue
            p = line_intersection(a, b, c, d)
            if p is not None and max(a.x, c.x) < p.x < min(b.x, d.x):
                xs.add(p.x)
    xs = sorted(xs)

    def y_at(e, x):
        a, b = e
        return a.y + (b.y - a.y) * (x - a.x) / (b.x - a.x)

    for xl, xr in zip(xs, xs[1:]):
        xm = (xl + xr) / 2
        live = [e for e in edges if e[0].x <= xl and e[1].x >= xr]
        live.sort(key=lambda e: y_at(e, xm))
        for lo, hi in zip(live, live[1:]):
            ylo, yhi = y_at(lo, xm), y_at(hi, xm)
            if ylo == yhi:
                continue
            poly = ConvexPolygon([Point(xl, y_at(lo, xl)), Point(xr, y_at(lo, xr)),
                                  Point(xr, y_at(hi, xr)), Point(xl, y_at(hi, xl))])
            if not poly.is_empty:
                yield poly, Point(xm, (ylo + yhi) / 2)


def incremental_cell_masses(D: MeasureSpec, seq: PartitionSequence) -> list[mpq]:
    """Exact Pr(cell_i) for every incremental cell, via the slab decomposition."""
    masses = [ZERO] * seq.r
    sup = [c.triangle for c in D.components]
    for poly, rep in _slab_trapezoids(seq):
        owner = seq.first_cover(rep)
        if owner is None:
            continue
        if not any(_bbox_meets(poly.vertices, s) for s in sup):
            continue
        masses[owner] += prob_polygon(D, poly)
    return masses


def _bbox_meets(vs, tri) -> bool:
    return not (max(v.x for v in vs) < min(v.x for v in tri) or min(v.x for v in vs) > max(v.x for v in tri)
                or max(v.y for v in vs) < min(v.y for v in tri) or min(v.y for v in vs) > max(v.y for v in tri))


def verify_measure_partition(D: MeasureSpec, seq: PartitionSequence) -> VerificationReport:
    masses = incremental_cell_masses(D, seq)
    cr = partition_crossings(seq)
    return VerificationReport(
        covers_all=sum(masses, ZERO) == 1,
        max_incremental_mass=max(masses) if masses else ZERO,
        max_line_crossings=cr.max_crossings,
        test_line_count=cr.test_line_count,
        incremental=masses,
    )


def measure_partition_ok(rep: VerificationReport, r: int, c_cross: float) -> bool:
    # replacing the last triangle may cost one extra unit of the crossing constant
    return (rep.covers_all and rep.max_incremental_mass <= mpq(3, r)
            and rep.max_line_crossings <= crossing_budget(r, c_cross + 1))


@dataclass(frozen=True)
class PartitionParams:
    c_cross: float = 4.0
    m_cap: int | None = 20000
    max_retries: int = 64
    strategy: str = "trim"

    def sample_size(self, r: int) -> int:
        m = paper_sample_size(r)
        return m if self.m_cap is None else min(m, self.m_cap)


def build_measure_partition(D: MeasureSpec, r: int, params: PartitionParams = PartitionParams(),
                            rng=None, log: list | None = None) -> tuple[PartitionSequence, int]:
    """Sample, partition, cover the support with the last triangle, verify exactly; retry on failure."""
    if r < 1:
        raise ValueError("r must be >= 1")
    cover = support_covering_triangle(D)
    if r == 1:
        return PartitionSequence([cover]), 0
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    m = params.sample_size(r)
    failures = 0
    while failures <= params.max_retries:
        sample = list(dict.fromkeys(sample_conditional_many(D, cover, m, rng)))
        try:
            seq = build_point_partition(sample, r, params.strategy, params.c_cross, log=log)
        except PartitionFailed:
            failures += 1
            continue
        seq = PartitionSequence(seq.triangles[:-1] + (cover,))
        rep = verify_measure_partition(D, seq)
        if log is not None:
            log.append({"stage": "measure", "strategy": params.strategy, **rep.row()})
        if measure_partition_ok(rep, r, params.c_cross):
            return seq, failures
        failures += 1
    raise PartitionFailed(f"no valid measure partition for r = {r} after {params.max_retries} retries")


def write_attempt_log(rows: list[dict], path) -> None:
    keys = ["stage", "strategy", "covers_all", "max_incremental_mass", "max_line_crossings", "test_line_count"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        for row in rows:
            w.writerow({k: row.get(k) for k in keys})


def save_partition(seq: PartitionSequence, path) -> None:
    Path(path).write_text(json.dumps(seq.to_dict(), indent=1) + "\n")


def load_partition(path) -> PartitionSequence:
    return PartitionSequence.from_dict(json.loads(Path(path).read_text()))
