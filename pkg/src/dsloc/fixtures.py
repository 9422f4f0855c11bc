"""Synthetic subdivisions and measures used by the tests, demos and benchmarks.

All coordinates are exact rationals inside [0, 1]^2, so fixtures need no
normalization.  The islands ladder scatters small diamond-shaped islands on
a grid around a central empty lake; the skewed measure lives in the lake, so
it is identical for every ladder size.
"""
from __future__ import annotations

import math

import numpy as np
from gmpy2 import mpq

from .geometry import Point, Triangle, UNIT_SQUARE, point
from .measure import Component, MeasureSpec, uniform
from .subdivision import Face, Subdivision

LAKE = (mpq(1, 4), mpq(3, 4))
_DEN = 1 << 16


def _q(num, den=_DEN):
    return mpq(int(num), den)


def single_triangle() -> Subdivision:
    v = [point("1/8", "1/8"), point("7/8", "1/8"), point("1/2", "7/8")]
    return Subdivision(v, [(0, 1), (1, 2), (2, 0)],
                       [Face("inside", point("1/2", "3/8")), Face("outer", point("1/16", "1/16"))])


def _diamond(cx, cy, rx0, ry0, rx1, ry1):
    return [Point(cx + rx1, cy), Point(cx, cy + ry1), Point(cx - rx0, cy), Point(cx, cy - ry0)]


def _islands(quads, labels, extra_faces=()) -> Subdivision:
    verts, edges, faces = [], [], []
    for quad, lab in zip(quads, labels):
        k = len(verts)
        verts.extend(quad)
        edges.extend((k + i, k + (i + 1) % 4) for i in range(4))
        cx = sum(p.x for p in quad) / 4
        cy = sum(p.y for p in quad) / 4
        faces.append(Face(lab, Point(cx, cy)))
    faces.extend(extra_faces)
    return verts, edges, faces


def two_islands() -> Subdivision:
    A = _diamond(mpq(1, 4), mpq(1, 2), *(mpq(1, 8),) * 4)
    B = _diamond(mpq(3, 4), mpq(1, 2), *(mpq(1, 8),) * 4)
    v, e, f = _islands([A, B], ["faceA", "faceB"], [Face("outer", point("1/2", "1/16"))])
    return Subdivision(v, e, f)


def nested_islands() -> Subdivision:
    """Three components: a square ring around an inner island, plus a separate island."""
    ring = [point("1/16", "1/16"), point("9/16", "1/16"), point("9/16", "9/16"), point("1/16", "9/16")]
    inner = _diamond(mpq(5, 16), mpq(5, 16), *(mpq(1, 8),) * 4)
    far = _diamond(mpq(3, 4), mpq(3, 4), *(mpq(1, 8),) * 4)
    v, e, f = _islands([ring, inner, far], ["moat", "inner", "far"], [Face("outer", point("15/16", "1/16"))])
    # the ring's stored point is its centre, which is inside the inner island; move it into the moat
    f[0] = Face("moat", point("1/8", "1/8"))
    return Subdivision(v, e, f)


def grid_subdivision(k: int = 4) -> Subdivision:
    """Connected k x k grid of square cells spanning [1/8, 7/8]^2."""
    lo, step = mpq(1, 8), mpq(3, 4) / k
    idx = {}
    verts = []
    for i in range(k + 1):
        for j in range(k + 1):
            idx[i, j] = len(verts)
            verts.append(Point(lo + i * step, lo + j * step))
    edges = []
    for i in range(k + 1):
        for j in range(k + 1):
            if i < k:
                edges.append((idx[i, j], idx[i + 1, j]))
            if j < k:
                edges.append((idx[i, j], idx[i, j + 1]))
    faces = [Face(f"cell_{i}_{j}", Point(lo + (i + mpq(1, 2)) * step, lo + (j + mpq(1, 2)) * step))
             for i in range(k) for j in range(k)]
    faces.append(Face("outer", point("1/16", "1/16")))
    return Subdivision(verts, edges, faces)


def islands_ladder(n: int, seed: int = 0) -> Subdivision:
    """n/4 jittered diamond islands on a grid, skipping cells that touch the central lake."""
    if n % 4:
        raise ValueError("n must be a multiple of 4")
    count = n // 4
    g = max(2, math.isqrt(count))
    lake_lo, lake_hi = LAKE
    while True:
        cells = [(i, j) for j in range(g) for i in range(g)
                 if not (mpq(i + 1, g) > lake_lo and mpq(i, g) < lake_hi
                         and mpq(j + 1, g) > lake_lo and mpq(j, g) < lake_hi)]
        if len(cells) >= count:
            break
        g += 1
    rng = np.random.default_rng(seed)
    cell = mpq(1, g)
    quads, labels = [], []
    for k, (i, j) in enumerate(cells[:count]):
        cx, cy = (i + mpq(1, 2)) * cell, (j + mpq(1, 2)) * cell
        radii = [cell * _q(rng.integers(_DEN // 5, _DEN * 2 // 5)) for _ in range(4)]
        quads.append(_diamond(cx, cy, *radii))
        labels.append(f"island_{k}")
    v, e, f = _islands(quads, labels, [Face("outer", Point(mpq(1, 2), mpq(1, 2)))])
    return Subdivision(v, e, f)


# ---------------------------------------------------------------------------
# measures

def uniform_square() -> MeasureSpec:
    return uniform(UNIT_SQUARE)


def skewed_lake(heavy=mpq(49, 50)) -> MeasureSpec:
    """Most mass on a tiny triangle in the lake, the rest on a wider lake triangle.

    The support-covering triangle of this mixture also stays inside the lake.
    """
    tiny = Triangle(point("63/128", "63/128"), point("65/128", "63/128"), point("1/2", "65/128"))
    wide = Triangle(point("7/16", "7/16"), point("9/16", "7/16"), point("1/2", "9/16"))
    return MeasureSpec([Component(tiny, mpq(heavy)), Component(wide, 1 - mpq(heavy))])


def skewed_99_1() -> MeasureSpec:
    tiny = Triangle(point("1/4", "1/4"), point("17/64", "1/4"), point("1/4", "17/64"))
    rest = Triangle(point("0", "0"), point("1", "0"), point("0", "1"))
    return MeasureSpec([Component(tiny, mpq(99, 100)), Component(rest, mpq(1, 100))])


def disconnected_support() -> MeasureSpec:
    a = Triangle(point("1/16", "1/16"), point("5/16", "1/16"), point("1/16", "5/16"))
    b = Triangle(point("11/16", "11/16"), point("15/16", "11/16"), point("15/16", "15/16"))
    return MeasureSpec([Component(a, mpq(1, 2)), Component(b, mpq(1, 2))])


def island_heavy(G: Subdivision, label: str, heavy=mpq(49, 50)) -> MeasureSpec:
    """Mass ``heavy`` on a small triangle around the stored point of one face, rest uniform."""
    f = next(f for f in G.faces if f.label == label)
    h = mpq(1, 64)
    tri = Triangle(Point(f.point.x - h, f.point.y - h), Point(f.point.x + h, f.point.y - h),
                   Point(f.point.x, f.point.y + h))
    rest = uniform(UNIT_SQUARE).components
    return MeasureSpec([Component(tri, mpq(heavy))]
                       + [Component(c.triangle, c.weight * (1 - mpq(heavy))) for c in rest])


FIXTURES = {
    "single_triangle": single_triangle,
    "two_islands": two_islands,
    "nested_islands": nested_islands,
    "grid": grid_subdivision,
}
