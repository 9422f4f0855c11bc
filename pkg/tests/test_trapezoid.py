import numpy as np
import pytest
from gmpy2 import mpq

from conftest import P
from dsloc import fixtures as fx
from dsloc.subdivision import Face, Subdivision, brute_locate
from dsloc.trapezoid import backup_box, backup_locate, build_backup


def _rand_pts(G, k, seed, pad=mpq(1, 4)):
    rng = np.random.default_rng(seed)
    x0, y0, x1, y1 = G.bounding_box()
    den = 1 << 20
    return [P(x0 - pad + (x1 - x0 + 2 * pad) * mpq(int(a), den), y0 - pad + (y1 - y0 + 2 * pad) * mpq(int(b), den))
            for a, b in rng.integers(0, den + 1, size=(k, 2))]


def test_single_triangle_map():
    G = fx.single_triangle()
    M = build_backup(G, seed=0)
    # three endpoints with distinct sheared abscissae give 7 trapezoids, one of them inside
    assert len(M.trapezoids) == 7
    assert sorted(t.label for t in M.trapezoids).count("inside") == 2
    for t in M.trapezoids:
        if not t.is_sliver():
            assert brute_locate(G, t.sample_point()).label == t.label
    assert M.area() == M.box_area()
    assert backup_locate(M, G.faces[0].point).label == "inside"
    assert backup_locate(M, P(mpq(1, 32), mpq(15, 16))).label == "outer"
    far = backup_locate(M, P(50, 50))
    assert far.label == "outer" and far.comparisons == 4


@pytest.mark.parametrize("name", ["two_islands", "nested_islands", "grid"])
def test_oracle_agreement_off_boundary(name):
    G = fx.FIXTURES[name]()
    M = build_backup(G, seed=3)
    assert M.area() == M.box_area()
    for t in M.trapezoids:
        assert brute_locate(G, t.sample_point()).label == t.label
    pts = _rand_pts(G, 1000, 1)
    for p in pts:
        loc = brute_locate(G, p)
        if not loc.on_boundary:
            assert backup_locate(M, p).label == loc.label


def test_boundary_points_get_incident_face():
    G = fx.two_islands()
    M = build_backup(G, seed=1)
    eps = mpq(1, 1 << 30)
    for s in G.segments():
        for u in (mpq(1, 3), mpq(1, 2)):
            p = P(s.a.x + u * (s.b.x - s.a.x), s.a.y + u * (s.b.y - s.a.y))
            near = {brute_locate(G, P(p.x + dx, p.y + dy)).label
                    for dx in (-eps, 0, eps) for dy in (-eps, 0, eps) if (dx, dy) != (0, 0)}
            assert backup_locate(M, p).label in near
    for v in G.vertices:
        assert backup_locate(M, v).label in {f.label for f in G.faces}


def test_vertical_edges_and_slivers():
    # a square with vertical sides: queries exactly on x = 1/4 or x = 3/4 land in zero-width trapezoids
    sq = [P(mpq(1, 4), mpq(1, 4)), P(mpq(3, 4), mpq(1, 4)), P(mpq(3, 4), mpq(3, 4)), P(mpq(1, 4), mpq(3, 4))]
    G = Subdivision(sq, [(0, 1), (1, 2), (2, 3), (3, 0)], [Face("in", P(mpq(1, 2), mpq(1, 2))), Face("out", P(0, 0))])
    for seed in range(5):
        M = build_backup(G, seed)
        assert M.area() == M.box_area()
        assert any(t.is_sliver() for t in M.trapezoids)
        for x in (mpq(1, 4), mpq(3, 4)):
            assert backup_locate(M, P(x, mpq(1, 8))).label == "out"
            assert backup_locate(M, P(x, mpq(7, 8))).label == "out"
            assert backup_locate(M, P(x, mpq(1, 2))).label in ("in", "out")
        assert backup_locate(M, P(mpq(1, 2), mpq(1, 8))).label == "out"
        assert backup_locate(M, P(mpq(1, 2), mpq(1, 2))).label == "in"


def test_same_seed_same_structure():
    G = fx.islands_ladder(64)
    a, b = build_backup(G, 7), build_backup(G, 7)
    assert a.order == b.order
    pts = _rand_pts(G, 300, 2)
    assert [backup_locate(a, p) for p in pts] == [backup_locate(b, p) for p in pts]
    assert build_backup(G, 8).order != a.order


def test_box_and_stats():
    G = fx.two_islands()
    x0, y0, x1, y1 = backup_box(G)
    assert x0 < min(v.x for v in G.vertices) and x1 > max(v.x for v in G.vertices)
    M = build_backup(G)
    st = M.stats()
    assert st["segments"] == len(G.edges)
    assert st["trapezoids"] <= st["trapezoid_bound"]
    assert M.max_depth() >= 1


def test_ladder_depth_and_agreement():
    G = fx.islands_ladder(256)
    M = build_backup(G, 0)
    assert M.area() == M.box_area()
    pts = _rand_pts(G, 2000, 4, pad=0)
    depths = []
    for p in pts:
        loc = brute_locate(G, p)
        res = backup_locate(M, p)
        depths.append(res.depth)
        if not loc.on_boundary:
            assert res.label == loc.label
    assert np.mean(depths) <= 8 * np.log2(257)
