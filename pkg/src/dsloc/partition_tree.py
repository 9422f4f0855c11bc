"""The distribution-sensitive search tree and its two-phase query.

Each internal node partitions its region with a measure partition of the
conditioned measure, builds the low-crossing scaffolding on the partition's
vertices, and clips the resulting triangulation back to the region.  Each
clipped triangle becomes a child.  A child whose interior lies inside a
single face is a terminal leaf.  A child that is too deep, carries no mass,
or whose own partition cannot be built becomes a nonterminal leaf, and
queries landing there fall through to the trapezoidal map.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from gmpy2 import mpq

from . import low_crossing as lc
from .geometry import (ConvexPolygon, DegenerateGeometry, Point, Triangle, UNIT_SQUARE, intersect_convex, orient,
                       point, polygon_area, to_q)
from .measure import MeasureSpec, condition, measure_from_dict, measure_to_dict, prob_polygon
from .simplicial import (PartitionFailed, PartitionParams, PartitionSequence, build_measure_partition,
                         measure_partition_ok, verify_measure_partition)
from .subdivision import (AffineTransform, Subdivision, normalize_unit_square, subdivision_from_dict,
                          subdivision_to_dict, triangle_face_classification)
from .trapezoid import TrapezoidalMap, backup_locate, build_backup

log = logging.getLogger(__name__)

FORMAT_TAG = "dsloc-structure/1"
INTERNAL, TERMINAL, NONTERMINAL = "internal", "terminal", "nonterminal"


@dataclass(frozen=True)
class TreeParams:
    r: int = 8
    alpha: Fraction = Fraction(1, 4)
    seed: int = 0
    m_cap: int | None = 20000
    max_retries: int = 64
    c_cross: float = 4.0
    c_stab: float = 6.0
    strategy: str = "trim"

    def __post_init__(self):
        object.__setattr__(self, "alpha", as_fraction(self.alpha))
        if self.r < 2:
            raise ValueError("r must be at least 2")
        if not (0 < self.alpha < Fraction(1, 2)):
            raise ValueError("alpha must lie strictly between 0 and 1/2")

    def partition_params(self) -> PartitionParams:
        return PartitionParams(c_cross=self.c_cross, m_cap=self.m_cap, max_retries=self.max_retries,
                               strategy=self.strategy)

    def to_dict(self) -> dict:
        return {"r": self.r, "alpha": str(self.alpha), "seed": self.seed, "m_cap": self.m_cap,
                "max_retries": self.max_retries, "c_cross": self.c_cross, "c_stab": self.c_stab,
                "strategy": self.strategy}

    @classmethod
    def from_dict(cls, d) -> "TreeParams":
        return cls(r=int(d["r"]), alpha=Fraction(d["alpha"]), seed=int(d["seed"]), m_cap=d["m_cap"],
                   max_retries=int(d["max_retries"]), c_cross=float(d["c_cross"]), c_stab=float(d["c_stab"]),
                   strategy=d["strategy"])


def as_fraction(a) -> Fraction:
    if isinstance(a, Fraction):
        return a
    if isinstance(a, float):
        return Fraction(a).limit_denominator(1 << 20)
    return Fraction(str(a))


def depth_cap(n: int, r: int, alpha) -> int:
    """floor(alpha * log_r n), computed exactly: the largest d with r^d <= n^alpha."""
    a = as_fraction(alpha)
    if n <= 1:
        return 0
    p, q = a.numerator, a.denominator
    target = n ** p
    d = 0
    while r ** ((d + 1) * q) <= target:
        d += 1
    return d


@dataclass
class Node:
    id: int
    parent: int | None
    depth: int
    region: ConvexPolygon | Triangle
    mass: mpq
    kind: str = NONTERMINAL
    label: str | None = None
    reason: str | None = None
    children: list[int] = field(default_factory=list)
    partition: PartitionSequence | None = None
    box: ConvexPolygon | None = None
    tree_edges: tuple = ()
    retries: int = 0
    tree_crossings: int | None = None
    triangulation_crossings: int | None = None
    max_face_size: int | None = None  # longest arrangement face walk, recorded not assumed

    @property
    def is_leaf(self) -> bool:
        return self.kind != INTERNAL


@dataclass
class QueryStats:
    comparisons: int
    depth: int
    terminal: bool
    used_backup: bool
    leaf: int | None = None


@dataclass
class PartitionTree:
    nodes: list[Node]
    params: TreeParams
    n: int
    depth_cap: int

    @property
    def root(self) -> Node:
        return self.nodes[0]

    def leaves(self) -> list[Node]:
        return [nd for nd in self.nodes if nd.is_leaf]

    def max_children(self) -> int:
        return max((len(nd.children) for nd in self.nodes), default=0)

    def path(self, node_id: int) -> str:
        parts = []
        nd = self.nodes[node_id]
        while nd.parent is not None:
            parts.append(str(self.nodes[nd.parent].children.index(nd.id)))
            nd = self.nodes[nd.parent]
        return "/".join(["root"] + parts[::-1])

    def level_counts(self) -> list[int]:
        out: list[int] = []
        for nd in self.nodes:
            while len(out) <= nd.depth:
                out.append(0)
            out[nd.depth] += 1
        return out

    def stats(self) -> dict:
        leaves = self.leaves()
        term = [nd for nd in leaves if nd.kind == TERMINAL]
        return {
            "nodes": len(self.nodes),
            "internal": sum(1 for nd in self.nodes if nd.kind == INTERNAL),
            "terminal_leaves": len(term),
            "nonterminal_leaves": len(leaves) - len(term),
            "terminal_mass": str(sum((nd.mass for nd in term), mpq(0))),
            "nodes_per_level": self.level_counts(),
            "max_children": self.max_children(),
            "depth_cap": self.depth_cap,
            "n": self.n,
            "retries": sum(nd.retries for nd in self.nodes),
            "build_failures": sum(1 for nd in self.nodes if nd.reason == "build_failed"),
            "max_tree_crossings": max((nd.tree_crossings or 0 for nd in self.nodes), default=0),
            "max_triangulation_crossings": max((nd.triangulation_crossings or 0 for nd in self.nodes), default=0),
            "max_face_size": max((nd.max_face_size or 0 for nd in self.nodes), default=0),
        }


# ---------------------------------------------------------------------------
# construction

def node_children_regions(region, seq: PartitionSequence, tree_edges, box: ConvexPolygon):
    """Triangles of the node's Steiner triangulation clipped to its region, fanned into triangles."""
    V = lc.vertex_set(seq, box)
    tree = lc.SpanningTree(tuple(V), tuple(tree_edges))
    A = lc.triangulate_arrangement(seq, tree, box)
    out = []
    for t in A.triangles:
        piece = intersect_convex(t, region)
        if not piece.is_empty:
            out.extend(piece.fan())
    return out, A


def expand_node(nd: Node, D: MeasureSpec, params: TreeParams, rng) -> list[Triangle]:
    """Build the node's partition and scaffolding; returns its child triangles."""
    Dn = D if nd.parent is None else condition(D, nd.region)
    seq, retries = build_measure_partition(Dn, params.r, params.partition_params(), rng)
    nd.retries = retries
    region_pts = list(nd.region.vertices if isinstance(nd.region, ConvexPolygon) else nd.region)
    box = lc.enclosing_square(seq.vertices() + region_pts)
    V = lc.vertex_set(seq, box)
    tree = lc.spanning_tree_low_crossing(V)
    nd.partition, nd.box, nd.tree_edges = seq, box, tree.edges
    nd.tree_crossings = tree.crossing_report().max_crossings
    kids, A = node_children_regions(nd.region, seq, tree.edges, box)
    nd.triangulation_crossings = A.crossing_report().max_crossings
    arr = A.arrangement
    nd.max_face_size = max((len(arr.face_walk(f)) for f in arr.bounded_faces()), default=0)
    return kids


def build_tree(G: Subdivision, D: MeasureSpec, params: TreeParams = TreeParams(), progress=None) -> PartitionTree:
    """Breadth-first construction; G and D must already lie in the unit square."""
    if not D.in_unit_square():
        raise ValueError("measure support must lie in the unit square; normalize first")
    cap = depth_cap(G.n, params.r, params.alpha)
    root = Node(0, None, 0, UNIT_SQUARE, prob_polygon(D, UNIT_SQUARE), kind=INTERNAL)
    nodes = [root]
    queue = [0]
    head = 0
    while head < len(queue):
        nd = nodes[queue[head]]
        head += 1
        rng = np.random.default_rng([params.seed, nd.id])
        try:
            kids = expand_node(nd, D, params, rng)
        except (PartitionFailed, lc.DegenerateFace, DegenerateGeometry) as exc:
            if nd.parent is None:
                raise
            log.warning("node %d: build failed (%s); demoted to nonterminal leaf", nd.id, exc)
            nd.kind, nd.reason = NONTERMINAL, "build_failed"
            nd.partition = nd.box = None
            nd.tree_edges = ()
            continue
        created = []
        for order, t in enumerate(kids):
            child = Node(len(nodes) + len(created), nd.id, nd.depth + 1, t, prob_polygon(D, t))
            cls = triangle_face_classification(G, t)
            if cls.single:
                child.kind, child.label = TERMINAL, cls.label
            elif child.depth > cap:
                child.reason = "depth_cap"
            elif child.mass == 0:
                child.reason = "zero_mass"
            else:
                child.kind = INTERNAL
            created.append((order, child))
        # heaviest children first, so the descent scan usually stops early
        created.sort(key=lambda oc: (-oc[1].mass, oc[0]))
        for order, child in created:
            child.id = len(nodes)
            nodes.append(child)
            nd.children.append(child.id)
            if child.kind == INTERNAL:
                queue.append(child.id)
        if progress:
            progress(nd, len(nodes))
    return PartitionTree(nodes, params, G.n, cap)


# ---------------------------------------------------------------------------
# queries

def _in_unit_square(p: Point) -> bool:
    return 0 <= p.x <= 1 and 0 <= p.y <= 1


def _tri_contains_counted(t: Triangle, p: Point) -> tuple[bool, int]:
    a, b, c = t
    if orient(a, b, p) < 0:
        return False, 1
    if orient(b, c, p) < 0:
        return False, 2
    return orient(c, a, p) >= 0, 3


def query(T: PartitionTree, M: TrapezoidalMap, p: Point) -> tuple[str, QueryStats]:
    """Descend T by linear child scans; fall back to the trapezoidal map at nonterminal leaves."""
    comps = 4
    if not _in_unit_square(p):
        res = backup_locate(M, p)
        return res.label, QueryStats(comps + res.comparisons, 0, False, True)
    nd = T.root
    while True:
        nxt = None
        for cid in nd.children:
            child = T.nodes[cid]
            hit, k = _tri_contains_counted(child.region, p)
            comps += k
            if hit:
                nxt = child
                break
        if nxt is None:  # cannot happen for a valid tree; stay correct regardless
            res = backup_locate(M, p)
            return res.label, QueryStats(comps + res.comparisons, nd.depth, False, True, nd.id)
        nd = nxt
        if nd.kind == TERMINAL:
            return nd.label, QueryStats(comps, nd.depth, True, False, nd.id)
        if nd.kind == NONTERMINAL:
            res = backup_locate(M, p)
            return res.label, QueryStats(comps + res.comparisons, nd.depth, False, True, nd.id)


def leaves_with_masses(T: PartitionTree) -> list[tuple[Node, mpq]]:
    return [(nd, nd.mass) for nd in T.leaves()]


# ---------------------------------------------------------------------------
# full structure: normalization + tree + backup

@dataclass
class Structure:
    G: Subdivision  # normalized
    D: MeasureSpec  # normalized
    transform: AffineTransform
    tree: PartitionTree
    backup: TrapezoidalMap

    def locate(self, p: Point) -> tuple[str, QueryStats]:
        return query(self.tree, self.backup, self.transform.apply(p))


def build_structure(G: Subdivision, D: MeasureSpec, params: TreeParams = TreeParams(), progress=None) -> Structure:
    Gn, Dn, tr = normalize_unit_square(G, D)
    T = build_tree(Gn, Dn, params, progress)
    M = build_backup(Gn, params.seed)
    return Structure(Gn, Dn, tr, T, M)


def _pts(vs) -> list[list[str]]:
    return [[str(v.x), str(v.y)] for v in vs]


def _node_to_dict(nd: Node) -> dict:
    region = nd.region.vertices if isinstance(nd.region, ConvexPolygon) else list(nd.region)
    return {
        "id": nd.id, "parent": nd.parent, "depth": nd.depth, "kind": nd.kind, "label": nd.label,
        "reason": nd.reason, "mass": str(nd.mass), "region": _pts(region), "children": nd.children,
        "partition": nd.partition.to_dict()["triangles"] if nd.partition else None,
        "box": _pts(nd.box.vertices) if nd.box else None,
        "tree_edges": [list(e) for e in nd.tree_edges], "retries": nd.retries,
        "tree_crossings": nd.tree_crossings, "triangulation_crossings": nd.triangulation_crossings,
        "max_face_size": nd.max_face_size,
    }


def _node_from_dict(d) -> Node:
    region_pts = [point(x, y) for x, y in d["region"]]
    region = ConvexPolygon(region_pts) if d["parent"] is None else Triangle(*region_pts)
    part = PartitionSequence.from_dict({"triangles": d["partition"]}) if d["partition"] else None
    box = ConvexPolygon([point(x, y) for x, y in d["box"]]) if d["box"] else None
    return Node(int(d["id"]), d["parent"], int(d["depth"]), region, to_q(d["mass"]), d["kind"], d["label"],
                d["reason"], list(d["children"]), part, box, tuple(tuple(e) for e in d["tree_edges"]),
                int(d["retries"]), d["tree_crossings"], d["triangulation_crossings"], d.get("max_face_size"))


def structure_to_dict(S: Structure) -> dict:
    return {
        "format": FORMAT_TAG,
        "params": S.tree.params.to_dict(),
        "n": S.tree.n,
        "depth_cap": S.tree.depth_cap,
        "transform": S.transform.to_dict(),
        "subdivision": subdivision_to_dict(S.G),
        "measure": measure_to_dict(S.D),
        "backup": {"seed": S.backup.seed, **S.backup.stats()},
        "stats": S.tree.stats(),
        "nodes": [_node_to_dict(nd) for nd in S.tree.nodes],
    }


def structure_from_dict(data: dict) -> Structure:
    if data.get("format") != FORMAT_TAG:
        raise ValueError(f"unsupported structure format {data.get('format')!r}")
    params = TreeParams.from_dict(data["params"])
    G = subdivision_from_dict(data["subdivision"])
    D = measure_from_dict(data["measure"])
    nodes = [_node_from_dict(d) for d in data["nodes"]]
    T = PartitionTree(nodes, params, int(data["n"]), int(data["depth_cap"]))
    M = build_backup(G, int(data["backup"]["seed"]))
    return Structure(G, D, AffineTransform.from_dict(data["transform"]), T, M)


def save_structure(S: Structure, path) -> None:
    Path(path).write_text(json.dumps(structure_to_dict(S), indent=1, sort_keys=True) + "\n")


def load_structure(path) -> Structure:
    return structure_from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# verification

@dataclass
class Violation:
    node: str
    message: str


def verify_structure(S: Structure, check_partitions: bool = True) -> list[Violation]:
    """Re-run every exact check; an empty list means the structure is sound."""
    T, G, D = S.tree, S.G, S.D
    out: list[Violation] = []
    total = mpq(0)
    for nd in T.nodes:
        where = T.path(nd.id)
        if nd.mass != prob_polygon(D, nd.region):
            out.append(Violation(where, "stored mass differs from the measure"))
        if nd.kind == INTERNAL:
            if not nd.children:
                out.append(Violation(where, "internal node without children"))
                continue
            kids = [T.nodes[c].region for c in nd.children]
            if sum((t.area() for t in kids), mpq(0)) != polygon_area(nd.region):
                out.append(Violation(where, "child areas do not tile the region"))
            region = nd.region if isinstance(nd.region, ConvexPolygon) else ConvexPolygon(nd.region)
            if any(not region.contains(v) for t in kids for v in t):
                out.append(Violation(where, "child triangle leaves the region"))
            if nd.partition is None or nd.box is None:
                out.append(Violation(where, "internal node without partition"))
                continue
            try:
                rebuilt, _ = node_children_regions(nd.region, nd.partition, nd.tree_edges, nd.box)
            except (lc.DegenerateFace, DegenerateGeometry, ValueError) as exc:
                out.append(Violation(where, f"scaffolding cannot be rebuilt: {exc}"))
            else:
                if sorted(map(tuple, rebuilt)) != sorted(map(tuple, kids)):
                    out.append(Violation(where, "children differ from the rebuilt triangulation"))
            if check_partitions:
                Dn = D if nd.parent is None else condition(D, nd.region)
                rep = verify_measure_partition(Dn, nd.partition)
                if not measure_partition_ok(rep, T.params.r, T.params.c_cross):
                    out.append(Violation(where, f"partition conditions fail: {rep.row()}"))
        else:
            total += nd.mass
            if nd.kind == TERMINAL:
                cls = triangle_face_classification(G, nd.region)
                if not cls.single or cls.label != nd.label:
                    out.append(Violation(where, f"terminal label {nd.label!r} does not match {cls}"))
    if total != 1:
        out.append(Violation("root", f"leaf masses sum to {total}, not 1"))
    if S.backup.area() != S.backup.box_area():
        out.append(Violation("backup", "trapezoids do not tile the bounding box"))
    return out
