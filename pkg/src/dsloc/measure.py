"""Probability measures as finite mixtures of uniform densities on triangles.

Both access primitives the construction relies on are exact here: the mass of
any triangle (convex clipping against every support triangle) and sampling
from the measure conditioned on a triangle.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Hashable, Iterable, Sequence

import numpy as np
from gmpy2 import mpq

from .geometry import (ZERO, ConvexPolygon, Point, Triangle, intersect_convex, point,
                       polygon_area, to_q)


class ZeroMassRegion(ValueError):
    pass


class NegativeMass(ValueError):
    pass


class MeasureFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Component:
    triangle: Triangle
    weight: mpq


class MeasureSpec:
    """Weighted mixture of uniform densities; weights are positive and sum to exactly 1."""

    __slots__ = ("components",)

    def __init__(self, components: Iterable[Component | tuple]):
        comps = []
        for c in components:
            if not isinstance(c, Component):
                tri, w = c
                c = Component(tri if isinstance(tri, Triangle) else Triangle(*tri), to_q(w))
            if c.weight <= 0:
                raise ValueError(f"component weight must be positive, got {c.weight}")
            comps.append(c)
        if not comps:
            raise ValueError("measure needs at least one component")
        total = sum((c.weight for c in comps), ZERO)
        if total != 1:
            raise ValueError(f"component weights sum to {total}, not 1")
        self.components: tuple[Component, ...] = tuple(comps)

    def __repr__(self):
        return f"MeasureSpec({len(self.components)} components)"

    def __eq__(self, other):
        return isinstance(other, MeasureSpec) and self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def support_points(self) -> list[Point]:
        return [v for c in self.components for v in c.triangle]

    def in_unit_square(self) -> bool:
        return all(0 <= v.x <= 1 and 0 <= v.y <= 1 for v in self.support_points())


def uniform(region: ConvexPolygon | Triangle) -> MeasureSpec:
    """Uniform probability on a convex region."""
    tris = region.fan() if isinstance(region, ConvexPolygon) else [region]
    total = sum((t.area() for t in tris), ZERO)
    return MeasureSpec([Component(t, t.area() / total) for t in tris])


def prob_polygon(D: MeasureSpec, region: ConvexPolygon | Triangle) -> mpq:
    total = ZERO
    for c in D.components:
        inter = intersect_convex(c.triangle, region)
        if not inter.is_empty:
            total += c.weight * polygon_area(inter) / c.triangle.area()
    return total


def prob_triangle(D: MeasureSpec, t: Triangle) -> mpq:
    """Exact D(t)."""
    return prob_polygon(D, t)


def _pieces(D: MeasureSpec, region) -> list[tuple[Triangle, mpq]]:
    """Triangles tiling support ∩ region with their (unnormalized) masses."""
    out = []
    for c in D.components:
        inter = intersect_convex(c.triangle, region)
        if inter.is_empty:
            continue
        density = c.weight / c.triangle.area()
        for tri in inter.fan():
            out.append((tri, density * tri.area()))
    return out


def condition(D: MeasureSpec, t: Triangle | ConvexPolygon) -> MeasureSpec:
    """D restricted to t and renormalized; each clipped support is fan-triangulated."""
    pieces = _pieces(D, t)
    total = sum((m for _, m in pieces), ZERO)
    if total == 0:
        raise ZeroMassRegion("region has zero mass under the measure")
    return MeasureSpec([Component(tri, m / total) for tri, m in pieces])


_SAMPLE_BITS = 32
_SAMPLE_DEN = 1 << _SAMPLE_BITS


def _rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _uniform_in(tri: Triangle, u: int, v: int) -> Point:
    if u + v > _SAMPLE_DEN:
        u, v = _SAMPLE_DEN - u, _SAMPLE_DEN - v
    fu, fv = mpq(u, _SAMPLE_DEN), mpq(v, _SAMPLE_DEN)
    a, b, c = tri
    return Point(a.x + fu * (b.x - a.x) + fv * (c.x - a.x), a.y + fu * (b.y - a.y) + fv * (c.y - a.y))


def sample_conditional_many(D: MeasureSpec, t: Triangle | ConvexPolygon, k: int, rng_seed=None) -> list[Point]:
    """k i.i.d. exact rational points from D conditioned on t."""
    rng = _rng(rng_seed)
    pieces = _pieces(D, t)
    total = sum((m for _, m in pieces), ZERO)
    if total == 0:
        raise ZeroMassRegion("cannot sample from a zero-mass region")
    probs = np.array([float(m / total) for _, m in pieces])
    probs /= probs.sum()
    which = rng.choice(len(pieces), size=k, p=probs)
    uv = rng.integers(0, _SAMPLE_DEN, size=(k, 2), endpoint=False, dtype=np.int64)
    return [_uniform_in(pieces[w][0], int(u), int(v)) for w, (u, v) in zip(which, uv)]


def sample_conditional(D: MeasureSpec, t: Triangle | ConvexPolygon, rng_seed=None) -> Point:
    return sample_conditional_many(D, t, 1, rng_seed)[0]


def support_covering_triangle(D: MeasureSpec) -> Triangle:
    """A triangle containing the support: the lone support triangle, else a bounding-box triangle."""
    if len(D.components) == 1:
        return D.components[0].triangle
    pts = D.support_points()
    x0 = min(p.x for p in pts)
    y0 = min(p.y for p in pts)
    x1 = max(p.x for p in pts)
    y1 = max(p.y for p in pts)
    w, h = x1 - x0, y1 - y0
    # right triangle with legs 2w, 2h anchored at the lower-left corner holds the box
    return Triangle(Point(x0, y0), Point(x0 + 2 * w, y0), Point(x0, y0 + 2 * h))


@dataclass(frozen=True)
class CellProbability:
    cell: Hashable
    mass: mpq


def entropy(cells: Sequence[CellProbability | mpq | float | int]) -> float:
    """Shannon entropy in bits, with 0 log(1/0) = 0."""
    h = 0.0
    for c in cells:
        m = c.mass if isinstance(c, CellProbability) else c
        if m < 0:
            raise NegativeMass(f"negative mass {m}")
        if m > 0:
            p = float(m)
            h -= p * math.log2(p)
    return h


# ---------------------------------------------------------------------------
# JSON format

def _pt(pair) -> Point:
    if len(pair) != 2:
        raise MeasureFormatError(f"expected [x, y], got {pair!r}")
    return point(str(pair[0]), str(pair[1]))


def measure_to_dict(D: MeasureSpec) -> dict:
    return {
        "components": [
            {"triangle": [[str(v.x), str(v.y)] for v in c.triangle], "weight": str(c.weight)}
            for c in D.components
        ]
    }


def measure_from_dict(data: dict) -> MeasureSpec:
    try:
        comps = []
        for c in data["components"]:
            tri = Triangle(*(_pt(v) for v in c["triangle"]))
            comps.append(Component(tri, to_q(str(c["weight"]))))
        return MeasureSpec(comps)
    except (KeyError, TypeError, ValueError) as exc:
        raise MeasureFormatError(str(exc)) from exc


def save_measure(D: MeasureSpec, path) -> None:
    Path(path).write_text(json.dumps(measure_to_dict(D), indent=1) + "\n")


def load_measure(path) -> MeasureSpec:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MeasureFormatError(f"{path}: {exc}") from exc
    return measure_from_dict(data)
