import math

import numpy as np
import pytest
from gmpy2 import mpq
from hypothesis import assume, given

from conftest import P, points
from dsloc.geometry import Triangle, UNIT_SQUARE, intersect_convex, orient, rectangle
from dsloc.measure import (CellProbability, Component, MeasureSpec, NegativeMass, ZeroMassRegion, condition,
                           entropy, load_measure, measure_from_dict, measure_to_dict, prob_polygon, prob_triangle,
                           sample_conditional, sample_conditional_many, save_measure, support_covering_triangle,
                           uniform)

U = uniform(UNIT_SQUARE)
TA = Triangle(P(0, 0), P(mpq(1, 2), 0), P(0, mpq(1, 2)))
TB = Triangle(P(mpq(3, 4), mpq(3, 4)), P(1, mpq(3, 4)), P(1, 1))
MIX = MeasureSpec([Component(TA, mpq(7, 10)), Component(TB, mpq(3, 10))])


def test_prob_triangle_examples():
    assert prob_triangle(U, Triangle(P(0, 0), P(1, 0), P(0, 1))) == mpq(1, 2)
    assert prob_triangle(U, Triangle(P(2, 2), P(3, 2), P(2, 3))) == 0
    big = Triangle(P(-1, -1), P(mpq(3, 2), -1), P(-1, mpq(3, 2)))
    assert prob_triangle(MIX, big) == mpq(7, 10)


def test_weights_must_sum_to_one():
    with pytest.raises(ValueError):
        MeasureSpec([Component(TA, mpq(1, 2))])
    with pytest.raises(ValueError):
        MeasureSpec([Component(TA, mpq(3, 2)), Component(TB, mpq(-1, 2))])


def test_sample_mean_unit_square():
    pts = sample_conditional_many(U, UNIT_SQUARE, 100_000, 11)
    xs = np.array([float(p.x) for p in pts])
    ys = np.array([float(p.y) for p in pts])
    sigma = math.sqrt(1 / 12 / len(pts))
    assert abs(xs.mean() - 0.5) < 3 * sigma
    assert abs(ys.mean() - 0.5) < 3 * sigma


def test_sample_left_half():
    left = rectangle(0, 0, mpq(1, 2), 1)
    pts = sample_conditional_many(U, left, 20_000, 5)
    assert all(p.x <= mpq(1, 2) for p in pts)
    xs = np.array([float(p.x) for p in pts])
    assert abs(xs.mean() - 0.25) < 3 * math.sqrt(1 / 48 / len(pts))


def test_sample_zero_mass_raises():
    with pytest.raises(ZeroMassRegion):
        sample_conditional(U, Triangle(P(2, 2), P(3, 2), P(2, 3)), 0)
    with pytest.raises(ZeroMassRegion):
        condition(U, Triangle(P(2, 2), P(3, 2), P(2, 3)))


def test_sampling_is_reproducible():
    a = sample_conditional_many(MIX, TA, 50, 9)
    b = sample_conditional_many(MIX, TA, 50, 9)
    assert a == b


def test_sample_histogram_chi_square():
    # counts in four sub-triangles of the mixture against exact masses
    from scipy.stats import chisquare
    cells = [Triangle(P(0, 0), P(mpq(1, 4), 0), P(0, mpq(1, 4))),
             Triangle(P(mpq(1, 4), 0), P(mpq(1, 2), 0), P(0, mpq(1, 2))),
             Triangle(P(0, mpq(1, 4)), P(mpq(1, 4), 0), P(0, mpq(1, 2))),
             TB]
    masses = [float(prob_triangle(MIX, c)) for c in cells]
    assert abs(sum(masses) - 1) < 1e-12
    pts = sample_conditional_many(MIX, Triangle(P(-1, -1), P(3, -1), P(-1, 3)), 100_000, 21)
    counts = [0] * 4
    for p in pts:
        for i, c in enumerate(cells):
            if c.contains(p):
                counts[i] += 1
                break
    assert sum(counts) == len(pts)
    assert chisquare(counts, [m * len(pts) for m in masses]).pvalue > 0.001


def test_condition_left_half_doubles():
    half = Triangle(P(0, 0), P(1, 0), P(0, 1))
    Dh = condition(U, half)
    s = Triangle(P(mpq(1, 8), mpq(1, 8)), P(1, mpq(1, 8)), P(mpq(1, 8), 1))
    assert prob_triangle(Dh, s) == 2 * prob_polygon(U, intersect_convex(s, half))


def test_condition_on_support_is_identity_as_function():
    cover = support_covering_triangle(MIX)
    Dc = condition(MIX, cover)
    for t in [TA, TB, Triangle(P(0, 0), P(1, 0), P(1, 1)), Triangle(P(mpq(1, 5), 0), P(1, 1), P(0, 1))]:
        assert prob_triangle(Dc, t) == prob_triangle(MIX, t)


def test_condition_identity_random():
    rng = np.random.default_rng(2)
    t = Triangle(P(0, 0), P(mpq(3, 4), mpq(1, 8)), P(mpq(1, 4), 1))
    Dt = condition(U, t)
    pt = prob_triangle(U, t)
    done = 0
    while done < 100:
        a, b, c = [P(mpq(int(x), 16), mpq(int(y), 16)) for x, y in rng.integers(-2, 18, size=(3, 2))]
        if orient(a, b, c) == 0:
            continue
        s = Triangle(a, b, c)
        assert prob_triangle(Dt, s) * pt == prob_polygon(U, intersect_convex(s, t))
        done += 1


@given(points, points, points, points)
def test_prob_additive_over_chord(a, b, c, d):
    assume(orient(a, b, c) != 0)
    t = Triangle(a, b, c)
    m = P((b.x + c.x) / 2, (b.y + c.y) / 2)
    left, right = Triangle(a, b, m), Triangle(a, m, c)
    assert prob_triangle(MIX, left) + prob_triangle(MIX, right) == prob_triangle(MIX, t)


def test_monotone():
    small = Triangle(P(0, 0), P(mpq(1, 4), 0), P(0, mpq(1, 4)))
    assert prob_triangle(MIX, small) <= prob_triangle(MIX, TA)


def test_entropy_examples():
    assert entropy([mpq(1, 4)] * 4) == pytest.approx(2.0, abs=1e-12)
    assert entropy([mpq(1)]) == 0.0
    assert entropy([mpq(1, 2), mpq(1, 4), mpq(1, 4)]) == pytest.approx(1.5, abs=1e-12)
    assert entropy([CellProbability("a", mpq(1, 2)), CellProbability("b", mpq(1, 2))]) == pytest.approx(1.0)
    with pytest.raises(NegativeMass):
        entropy([mpq(-1, 2), mpq(3, 2)])


def test_entropy_max_at_uniform():
    rng = np.random.default_rng(0)
    for k in range(2, 10):
        w = rng.integers(1, 100, size=k)
        cells = [mpq(int(x), int(w.sum())) for x in w]
        assert entropy(cells) <= math.log2(k) + 1e-12


def test_json_roundtrip(tmp_path):
    save_measure(MIX, tmp_path / "m.json")
    assert load_measure(tmp_path / "m.json") == MIX
    assert measure_from_dict(measure_to_dict(MIX)) == MIX
