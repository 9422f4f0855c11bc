"""Exact planar geometry over rational coordinates.

Coordinates are ``gmpy2.mpq`` rationals.  Every predicate here is exact; the
batched helpers at the bottom run a float64 filter first and only fall back to
rational arithmetic for entries the filter cannot certify.
"""
from __future__ import annotations

import enum
import math
from collections import namedtuple
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from gmpy2 import mpq

Q = mpq
ZERO = mpq(0)
ONE = mpq(1)
HALF = mpq(1, 2)


class DegenerateGeometry(ValueError):
    """Raised for zero-length segments, collinear triangles and similar input."""


def to_q(v) -> mpq:
    """Convert ``v`` (int, str ``"p/q"``, Fraction, float, mpq) to an exact rational."""
    if isinstance(v, str):
        return mpq(v.strip())
    if isinstance(v, Fraction):
        return mpq(v.numerator, v.denominator)
    return mpq(v)


def q_str(v: mpq) -> str:
    return str(v)


class Point(NamedTuple):
    x: mpq
    y: mpq

    def __str__(self):
        return f"({self.x}, {self.y})"


def point(x, y) -> Point:
    return Point(to_q(x), to_q(y))


def as_floats(p: Point) -> tuple[float, float]:
    return float(p.x), float(p.y)


class Segment(NamedTuple):
    a: Point
    b: Point


def segment(a: Point, b: Point) -> Segment:
    if a == b:
        raise DegenerateGeometry(f"zero-length segment at {a}")
    return Segment(a, b)


def orient_value(p: Point, q: Point, r: Point) -> mpq:
    return (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)


def orient(p: Point, q: Point, r: Point) -> int:
    """Sign of the cross product (q - p) x (r - p): +1 left turn, -1 right turn, 0 collinear."""
    v = (q.x - p.x) * (r.y - p.y) - (q.y - p.y) * (r.x - p.x)
    return (v > 0) - (v < 0)


_TriangleBase = namedtuple("_TriangleBase", "v0 v1 v2")


class Triangle(_TriangleBase):
    """Closed triangle, stored counterclockwise.  Collinear corners are rejected."""

    __slots__ = ()

    def __new__(cls, v0: Point, v1: Point, v2: Point):
        s = orient(v0, v1, v2)
        if s == 0:
            raise DegenerateGeometry(f"degenerate triangle {v0} {v1} {v2}")
        if s < 0:
            v1, v2 = v2, v1
        return super().__new__(cls, v0, v1, v2)

    def area(self) -> mpq:
        return orient_value(self.v0, self.v1, self.v2) / 2

    def centroid(self) -> Point:
        return Point((self.v0.x + self.v1.x + self.v2.x) / 3, (self.v0.y + self.v1.y + self.v2.y) / 3)

    def edges(self) -> tuple[Segment, Segment, Segment]:
        return (Segment(self.v0, self.v1), Segment(self.v1, self.v2), Segment(self.v2, self.v0))

    def contains(self, p: Point) -> bool:
        """Closed containment."""
        return (orient(self.v0, self.v1, p) >= 0 and orient(self.v1, self.v2, p) >= 0
                and orient(self.v2, self.v0, p) >= 0)

    def contains_strictly(self, p: Point) -> bool:
        return (orient(self.v0, self.v1, p) > 0 and orient(self.v1, self.v2, p) > 0
                and orient(self.v2, self.v0, p) > 0)

    def as_polygon(self) -> "ConvexPolygon":
        return ConvexPolygon((self.v0, self.v1, self.v2))


class Line(NamedTuple):
    """ax + by + c = 0 with integer coefficients in lowest terms, leading nonzero positive."""

    a: int
    b: int
    c: int

    @classmethod
    def from_coefficients(cls, a, b, c) -> "Line":
        a, b, c = to_q(a), to_q(b), to_q(c)
        if a == 0 and b == 0:
            raise DegenerateGeometry("line with a = b = 0")
        den = 1
        for v in (a, b, c):
            den = den * v.denominator // math.gcd(den, v.denominator)
        ia, ib, ic = (int(v * den) for v in (a, b, c))
        g = math.gcd(math.gcd(abs(ia), abs(ib)), abs(ic))
        ia, ib, ic = ia // g, ib // g, ic // g
        lead = ia if ia != 0 else ib
        if lead < 0:
            ia, ib, ic = -ia, -ib, -ic
        return cls(ia, ib, ic)

    @classmethod
    def through(cls, p: Point, q: Point) -> "Line":
        if p == q:
            raise DegenerateGeometry("line through coincident points")
        a = p.y - q.y
        b = q.x - p.x
        c = p.x * q.y - q.x * p.y
        return cls.from_coefficients(a, b, c)

    def evaluate(self, p: Point) -> mpq:
        return self.a * p.x + self.b * p.y + self.c

    def side(self, p: Point) -> int:
        v = self.evaluate(p)
        return (v > 0) - (v < 0)


class HalfPlane(NamedTuple):
    """Closed halfplane {(x, y) : a x + b y + c >= 0}."""

    a: mpq
    b: mpq
    c: mpq

    @classmethod
    def left_of(cls, p: Point, q: Point) -> "HalfPlane":
        """Closed halfplane to the left of the directed line p -> q."""
        return cls(p.y - q.y, q.x - p.x, p.x * q.y - q.x * p.y)

    @classmethod
    def from_line(cls, line: Line, side: int = 1) -> "HalfPlane":
        s = 1 if side >= 0 else -1
        return cls(mpq(s * line.a), mpq(s * line.b), mpq(s * line.c))

    def complement(self) -> "HalfPlane":
        return HalfPlane(-self.a, -self.b, -self.c)

    def evaluate(self, p: Point) -> mpq:
        return self.a * p.x + self.b * p.y + self.c


class ConvexPolygon:
    """Counterclockwise convex polygon; duplicate and collinear vertices are dropped.

    A polygon with fewer than three vertices after canonicalization is empty.
    """

    __slots__ = ("vertices",)

    def __init__(self, vertices: Iterable[Point]):
        self.vertices = _canonical_ring(list(vertices))

    @property
    def is_empty(self) -> bool:
        return not self.vertices

    def __len__(self):
        return len(self.vertices)

    def __iter__(self):
        return iter(self.vertices)

    def __eq__(self, other):
        return isinstance(other, ConvexPolygon) and _ring_key(self.vertices) == _ring_key(other.vertices)

    def __hash__(self):
        return hash(_ring_key(self.vertices))

    def __repr__(self):
        return "ConvexPolygon([" + ", ".join(str(v) for v in self.vertices) + "])"

    def halfplanes(self) -> list[HalfPlane]:
        vs = self.vertices
        return [HalfPlane.left_of(vs[i], vs[(i + 1) % len(vs)]) for i in range(len(vs))]

    def fan(self) -> list[Triangle]:
        vs = self.vertices
        return [Triangle(vs[0], vs[i], vs[i + 1]) for i in range(1, len(vs) - 1)]

    def contains(self, p: Point) -> bool:
        vs = self.vertices
        if not vs:
            return False
        return all(orient(vs[i], vs[(i + 1) % len(vs)], p) >= 0 for i in range(len(vs)))


def _ring_key(vs):
    if not vs:
        return ()
    i = min(range(len(vs)), key=lambda k: vs[k])
    return tuple(vs[i:] + vs[:i])


def _canonical_ring(vs: list[Point]) -> list[Point]:
    out: list[Point] = []
    for v in vs:
        if not out or out[-1] != v:
            out.append(v)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    changed = True
    while changed and len(out) >= 3:
        changed = False
        k = len(out)
        for i in range(k):
            if orient(out[i - 1], out[i], out[(i + 1) % k]) == 0:
                del out[i]
                changed = True
                break
    if len(out) < 3:
        return []
    if polygon_signed_area2(out) < 0:
        out.reverse()
    return out


EMPTY = ConvexPolygon(())


def polygon_signed_area2(vs: Sequence[Point]) -> mpq:
    """Twice the signed (shoelace) area of a closed vertex ring."""
    s = ZERO
    k = len(vs)
    for i in range(k):
        p, q = vs[i], vs[(i + 1) % k]
        s += p.x * q.y - q.x * p.y
    return s


def polygon_area(poly: ConvexPolygon | Triangle | Sequence[Point]) -> mpq:
    if isinstance(poly, Triangle):
        return poly.area()
    vs = poly.vertices if isinstance(poly, ConvexPolygon) else list(poly)
    if len(vs) < 3:
        return ZERO
    return abs(polygon_signed_area2(vs)) / 2


def clip_convex(poly: ConvexPolygon | Triangle, h: HalfPlane) -> ConvexPolygon:
    """Exact intersection of a convex polygon with a closed halfplane."""
    vs = poly.vertices if isinstance(poly, ConvexPolygon) else list(poly)
    if not vs:
        return EMPTY
    vals = [h.a * v.x + h.b * v.y + h.c for v in vs]
    if all(val >= 0 for val in vals):
        return poly if isinstance(poly, ConvexPolygon) else ConvexPolygon(vs)
    if all(val <= 0 for val in vals):
        return EMPTY
    out = []
    k = len(vs)
    for i in range(k):
        p, vp = vs[i], vals[i]
        q, vq = vs[(i + 1) % k], vals[(i + 1) % k]
        if vp >= 0:
            out.append(p)
        if (vp > 0 and vq < 0) or (vp < 0 and vq > 0):
            t = vp / (vp - vq)
            out.append(Point(p.x + t * (q.x - p.x), p.y + t * (q.y - p.y)))
    return ConvexPolygon(out)


def intersect_convex(poly: ConvexPolygon | Triangle, other: ConvexPolygon | Triangle) -> ConvexPolygon:
    other_vs = other.vertices if isinstance(other, ConvexPolygon) else list(other)
    res = poly if isinstance(poly, ConvexPolygon) else ConvexPolygon(poly)
    if isinstance(other, ConvexPolygon) and other.is_empty:
        return EMPTY
    k = len(other_vs)
    for i in range(k):
        if res.is_empty:
            return EMPTY
        res = clip_convex(res, HalfPlane.left_of(other_vs[i], other_vs[(i + 1) % k]))
    return res


def bounding_box(points: Iterable[Point]) -> tuple[mpq, mpq, mpq, mpq]:
    pts = list(points)
    xs = [p.x for p in pts]
    ys = [p.y for p in pts]
    return min(xs), min(ys), max(xs), max(ys)


def rectangle(x0, y0, x1, y1) -> ConvexPolygon:
    x0, y0, x1, y1 = map(to_q, (x0, y0, x1, y1))
    return ConvexPolygon([Point(x0, y0), Point(x1, y0), Point(x1, y1), Point(x0, y1)])


UNIT_SQUARE = rectangle(0, 0, 1, 1)


def line_crosses_triangle_interior(line: Line, t: Triangle) -> bool:
    sides = [line.side(v) for v in t]
    return 1 in sides and -1 in sides


class Contact(str, enum.Enum):
    DISJOINT = "disjoint"
    TOUCH = "touch"
    CROSS = "cross"


def _on_closed_segment(a: Point, b: Point, p: Point) -> bool:
    """p collinear with a, b assumed; closed-segment membership."""
    return min(a.x, b.x) <= p.x <= max(a.x, b.x) and min(a.y, b.y) <= p.y <= max(a.y, b.y)


def segments_intersect(s1: Segment, s2: Segment) -> Contact:
    """Classify two closed segments: interiors meet -> CROSS, only boundary points shared -> TOUCH."""
    a, b = s1
    c, d = s2
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    if o1 == 0 and o2 == 0:
        # collinear: project on the dominant axis
        key = (lambda p: (p.x, p.y)) if a.x != b.x else (lambda p: (p.y, p.x))
        lo1, hi1 = sorted((key(a), key(b)))
        lo2, hi2 = sorted((key(c), key(d)))
        lo, hi = max(lo1, lo2), min(hi1, hi2)
        if lo > hi:
            return Contact.DISJOINT
        if lo == hi:
            return Contact.TOUCH
        return Contact.CROSS
    if o1 * o2 < 0 and o3 * o4 < 0:
        return Contact.CROSS
    if ((o1 == 0 and _on_closed_segment(a, b, c)) or (o2 == 0 and _on_closed_segment(a, b, d))
            or (o3 == 0 and _on_closed_segment(c, d, a)) or (o4 == 0 and _on_closed_segment(c, d, b))):
        return Contact.TOUCH
    return Contact.DISJOINT


def touches_at_endpoints_only(s1: Segment, s2: Segment) -> bool:
    """True when the only common points of s1 and s2 are endpoints shared by both."""
    shared = {s1.a, s1.b} & {s2.a, s2.b}
    kind = segments_intersect(s1, s2)
    if kind is Contact.DISJOINT:
        return True
    if kind is Contact.CROSS:
        return False
    if not shared:
        return False
    # a T-junction would touch at a non-shared point
    for p in (s1.a, s1.b):
        if p not in shared and orient(s2.a, s2.b, p) == 0 and _on_closed_segment(s2.a, s2.b, p):
            return False
    for p in (s2.a, s2.b):
        if p not in shared and orient(s1.a, s1.b, p) == 0 and _on_closed_segment(s1.a, s1.b, p):
            return False
    return True


def line_intersection(a: Point, b: Point, c: Point, d: Point) -> Point | None:
    """Intersection of the supporting lines of ab and cd, or None when parallel."""
    den = (b.x - a.x) * (d.y - c.y) - (b.y - a.y) * (d.x - c.x)
    if den == 0:
        return None
    t = ((c.x - a.x) * (d.y - c.y) - (c.y - a.y) * (d.x - c.x)) / den
    return Point(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y))


def point_on_segment(p: Point, s: Segment) -> bool:
    return orient(s.a, s.b, p) == 0 and _on_closed_segment(s.a, s.b, p)


def segment_meets_open_triangle(s: Segment, t: Triangle) -> bool:
    """Does the closed segment meet the open interior of t?  Exact parametric clipping."""
    lo, lo_strict = ZERO, False
    hi, hi_strict = ONE, False
    a, b = s
    vs = t
    for i in range(3):
        p, q = vs[i], vs[(i + 1) % 3]
        # f(u) = orient(p, q, a + u (b - a)) = f0 + u * df, need f > 0
        f0 = orient_value(p, q, a)
        f1 = orient_value(p, q, b)
        df = f1 - f0
        if df == 0:
            if f0 <= 0:
                return False
            continue
        root = -f0 / df
        if df > 0:  # f > 0 for u > root
            if root > lo or (root == lo and not lo_strict):
                lo, lo_strict = root, True
        else:
            if root < hi or (root == hi and not hi_strict):
                hi, hi_strict = root, True
        if lo > hi or (lo == hi and (lo_strict or hi_strict)):
            return False
    return lo < hi or (lo == hi and not lo_strict and not hi_strict)


# ---------------------------------------------------------------------------
# Batched, float-filtered predicates

_FILTER_REL = 1e-9


def points_to_array(points: Sequence[Point]) -> np.ndarray:
    arr = np.empty((len(points), 2), dtype=np.float64)
    for i, p in enumerate(points):
        arr[i, 0] = float(p.x)
        arr[i, 1] = float(p.y)
    return arr


def orient_sign_matrix(line_a: Sequence[Point], line_b: Sequence[Point], pts: Sequence[Point],
                       fa: np.ndarray | None = None, fb: np.ndarray | None = None,
                       fp: np.ndarray | None = None) -> np.ndarray:
    """Exact signs orient(line_a[i], line_b[i], pts[k]) as an int8 matrix (lines x points).

    Float filter with exact fallback on every entry whose magnitude is below a
    conservative error bound.
    """
    fa = points_to_array(line_a) if fa is None else fa
    fb = points_to_array(line_b) if fb is None else fb
    fp = points_to_array(pts) if fp is None else fp
    if len(fa) == 0 or len(fp) == 0:
        return np.zeros((len(fa), len(fp)), dtype=np.int8)
    dx = (fb[:, 0] - fa[:, 0])[:, None]
    dy = (fb[:, 1] - fa[:, 1])[:, None]
    det = dx * (fp[None, :, 1] - fa[:, 1:2]) - dy * (fp[None, :, 0] - fa[:, 0:1])
    scale = 1.0 + max(np.abs(fa).max(), np.abs(fb).max(), np.abs(fp).max())
    tol = _FILTER_REL * scale * scale
    signs = np.sign(det).astype(np.int8)
    unsure = np.argwhere(np.abs(det) <= tol)
    for i, k in unsure:
        signs[i, k] = orient(line_a[i], line_b[i], pts[k])
    return signs
