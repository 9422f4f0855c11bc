import json

import numpy as np
import pytest
from gmpy2 import mpq

from conftest import P
from dsloc import fixtures as fx
from dsloc.geometry import Triangle, orient
from dsloc.measure import prob_triangle
from dsloc.subdivision import (Face, InvalidFaces, NonPlanarInput, ParseError, Subdivision, brute_locate,
                               brute_locate_many, load_subdivision, normalize_unit_square, save_subdivision,
                               subdivision_from_dict, subdivision_to_dict, triangle_face_classification)

TRI = fx.single_triangle()


def _squares(offset=0):
    sq = lambda x, y: [P(x, y), P(x + 1, y), P(x + 1, y + 1), P(x, y + 1)]
    v = sq(1 + offset, 1) + sq(4 + offset, 1)
    e = [(0, 1), (1, 2), (2, 3), (3, 0), (4, 5), (5, 6), (6, 7), (7, 4)]
    f = [Face("left", P(mpq(3, 2) + offset, mpq(3, 2))), Face("right", P(mpq(9, 2) + offset, mpq(3, 2))),
         Face("outer", P(0, 0))]
    return Subdivision(v, e, f)


def test_load_single_triangle(tmp_path):
    save_subdivision(TRI, tmp_path / "t.json")
    G = load_subdivision(tmp_path / "t.json")
    assert (G.n, len(G.edges), len(G.faces)) == (3, 3, 2)
    assert G == TRI


def test_two_squares_accepted():
    G = _squares()
    assert (G.n, len(G.edges), len(G.faces)) == (8, 8, 3)


def test_crossing_edges_rejected(tmp_path):
    d = {"vertices": [["0", "0"], ["1", "1"], ["0", "1"], ["1", "0"]], "edges": [[0, 1], [2, 3]],
         "faces": [{"label": "outer", "point": ["2", "2"]}]}
    (tmp_path / "x.json").write_text(json.dumps(d))
    with pytest.raises(NonPlanarInput):
        load_subdivision(tmp_path / "x.json")


def test_malformed_inputs(tmp_path):
    (tmp_path / "bad.json").write_text("{not json")
    with pytest.raises(ParseError):
        load_subdivision(tmp_path / "bad.json")
    with pytest.raises(ParseError):
        subdivision_from_dict({"vertices": [["0", "0"]], "edges": [[0, 5]], "faces": []})
    with pytest.raises(ParseError):
        subdivision_from_dict({"vertices": [["a", "0"]], "edges": [], "faces": []})


def test_face_count_checked():
    with pytest.raises(InvalidFaces):
        Subdivision(TRI.vertices, TRI.edges, TRI.faces[:1])
    with pytest.raises(InvalidFaces):
        Subdivision(TRI.vertices, TRI.edges, [TRI.faces[0], Face("x", P("1/2", "1/3"))])


def test_vertex_on_edge_rejected():
    v = [P(0, 0), P(2, 0), P(1, 0)]
    with pytest.raises(NonPlanarInput):
        Subdivision(v, [(0, 1)], [Face("outer", P(5, 5))])


def test_brute_locate_examples():
    assert brute_locate(TRI, TRI.faces[0].point) == ("inside", False)
    assert brute_locate(TRI, P(100, -3)).label == "outer"
    loc = brute_locate(TRI, P(mpq(1, 2), mpq(1, 8)))
    assert loc.on_boundary and loc.label in ("inside", "outer")
    assert brute_locate(TRI, P(mpq(1, 8), mpq(1, 8))).on_boundary


@pytest.mark.parametrize("name", ["single_triangle", "two_islands", "nested_islands", "grid"])
def test_representative_points_locate_to_their_faces(name):
    G = fx.FIXTURES[name]()
    for f in G.faces:
        assert brute_locate(G, f.point) == (f.label, False)




def test_brute_locate_many_matches_scalar():
    G = fx.nested_islands()
    rng = np.random.default_rng(3)
    pts = [P(mpq(int(x), 997), mpq(int(y), 997)) for x, y in rng.integers(0, 998, size=(500, 2))]
    assert brute_locate_many(G, pts) == [brute_locate(G, p) for p in pts]


def test_grid_cells_by_arithmetic():
    G = fx.grid_subdivision(4)
    rng = np.random.default_rng(1)
    step = mpq(3, 16)
    for x, y in rng.integers(0, 4096, size=(300, 2)):
        p = P(mpq(int(x), 4096), mpq(int(y), 4096))
        loc = brute_locate(G, p)
        if loc.on_boundary:
            continue
        lo, hi = mpq(1, 8), mpq(7, 8)
        if lo < p.x < hi and lo < p.y < hi:
            i, j = int((p.x - lo) / step), int((p.y - lo) / step)
            assert loc.label == f"cell_{i}_{j}"
        else:
            assert loc.label == "outer"


def test_classification_examples():
    inside = Triangle(P("3/8", "1/4"), P("5/8", "1/4"), P("1/2", "1/2"))
    assert triangle_face_classification(TRI, inside) == (True, "inside")
    straddle = Triangle(P("1/2", 0), P("3/4", "1/4"), P("1/4", "1/4"))
    assert not triangle_face_classification(TRI, straddle).single
    G = fx.two_islands()
    around = Triangle(P(0, 0), P(1, 0), P("1/2", 1))
    assert not triangle_face_classification(G, around).single
    # triangle touching an edge only along its boundary is still single
    touching = Triangle(P("1/8", "1/8"), P("7/8", "1/8"), P("1/2", 0))
    assert triangle_face_classification(TRI, touching) == (True, "outer")


def test_classification_single_implies_samples_agree():
    from dsloc.measure import sample_conditional_many, uniform
    from dsloc.geometry import UNIT_SQUARE
    G = fx.nested_islands()
    rng = np.random.default_rng(8)
    checked = 0
    while checked < 15:
        a, b, c = [P(mpq(int(x), 64), mpq(int(y), 64)) for x, y in rng.integers(0, 65, size=(3, 2))]
        if orient(a, b, c) == 0:
            continue
        t = Triangle(a, b, c)
        fc = triangle_face_classification(G, t)
        if not fc.single:
            continue
        pts = sample_conditional_many(uniform(UNIT_SQUARE), t, 100, checked)
        assert all(brute_locate(G, p).label == fc.label for p in pts)
        checked += 1


def test_roundtrip_dict():
    for name, make in fx.FIXTURES.items():
        G = make()
        assert subdivision_from_dict(json.loads(json.dumps(subdivision_to_dict(G)))) == G


def test_normalize_scales_into_square():
    v = [P(0, 0), P(10, 0), P(5, 10)]
    G = Subdivision(v, [(0, 1), (1, 2), (2, 0)], [Face("in", P(5, 3)), Face("out", P(20, 20))])
    from dsloc.measure import Component, MeasureSpec
    D = MeasureSpec([Component(Triangle(*v), mpq(1))])
    G2, D2, tr = normalize_unit_square(G, D)
    assert tr.scale == mpq(3, 40)
    for p in G2.vertices:
        assert mpq(1, 8) <= p.x <= mpq(7, 8) and mpq(1, 8) <= p.y <= mpq(7, 8)
    for p in G.vertices:
        assert tr.invert(tr.apply(p)) == p
    rng = np.random.default_rng(4)
    for _ in range(30):
        a, b, c = [P(int(x), int(y)) for x, y in rng.integers(-2, 13, size=(3, 2))]
        if orient(a, b, c) == 0:
            continue
        t = Triangle(a, b, c)
        t2 = Triangle(*(tr.apply(p) for p in t))
        assert prob_triangle(D, t) == prob_triangle(D2, t2)
    for f, f2 in zip(G.faces, G2.faces):
        assert brute_locate(G2, f2.point).label == f.label


def test_normalize_identity_inside_square():
    G = fx.two_islands()
    D = fx.uniform_square()
    G2, D2, tr = normalize_unit_square(G, D)
    assert tr.is_identity and G2 == G and D2 == D
