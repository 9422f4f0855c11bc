"""Entropy accounting and the query-cost benchmark.

Costs are counted in orientation tests (plus the four coordinate checks of
the unit-square test), entropies in bits.  Reports contain no wall-clock
numbers, so identical seeds give byte-identical files.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .measure import entropy, sample_conditional_many, support_covering_triangle
from .partition_tree import INTERNAL, TERMINAL, PartitionTree, Structure, leaves_with_masses, query


def leaf_entropy(T: PartitionTree) -> float:
    """H(L): entropy of the leaf masses."""
    return entropy([m for _, m in leaves_with_masses(T)])


def pruned_cells(T: PartitionTree) -> list[mpq]:
    """Masses of L': nonterminal leaves, plus one cell per internal node holding its terminal children."""
    cells = []
    for nd in T.nodes:
        if nd.kind == INTERNAL:
            term = [T.nodes[c].mass for c in nd.children if T.nodes[c].kind == TERMINAL]
            if term:
                cells.append(sum(term, mpq(0)))
        elif nd.kind != TERMINAL:
            cells.append(nd.mass)
    return cells


def pruned_leaf_entropy(T: PartitionTree) -> float:
    return entropy(pruned_cells(T))


def entropy_gap_bound(T: PartitionTree) -> float:
    return 2 * math.log2(max(2, T.max_children()))


CSV_FIELDS = [
    "fixture", "n", "r", "alpha", "seed", "queries", "mean_comparisons", "p50_comparisons", "p90_comparisons",
    "p99_comparisons", "max_comparisons", "terminal_fraction", "backup_fraction", "mean_depth",
    "leaf_entropy", "pruned_leaf_entropy", "log2_n", "c_q", "nodes", "leaves", "max_children", "depth_cap",
    "retries", "build_failures",
]


@dataclass
class BenchReport:
    fixture: str
    n: int
    r: int
    alpha: str
    seed: int
    queries: int
    mean_comparisons: float
    p50_comparisons: float
    p90_comparisons: float
    p99_comparisons: float
    max_comparisons: int
    terminal_fraction: float
    backup_fraction: float
    mean_depth: float
    leaf_entropy: float
    pruned_leaf_entropy: float
    log2_n: float
    c_q: float
    nodes: int
    leaves: int
    max_children: int
    depth_cap: int
    retries: int
    build_failures: int

    def row(self) -> dict:
        d = asdict(self)
        return {k: (round(v, 6) if isinstance(v, float) else v) for k, v in d.items()}


def run_benchmark(S: Structure, num_queries: int = 10_000, seed: int = 0, fixture: str = "") -> BenchReport:
    """Query points drawn from the (normalized) measure; costs and entropies of the built tree."""
    T = S.tree
    pts = sample_conditional_many(S.D, support_covering_triangle(S.D), num_queries, seed)
    comps = np.empty(len(pts), dtype=np.int64)
    term = back = 0
    depth = 0
    for i, p in enumerate(pts):
        _, st = query(T, S.backup, p)
        comps[i] = st.comparisons
        term += st.terminal
        back += st.used_backup
        depth += st.depth
    h = leaf_entropy(T)
    mean = float(comps.mean()) if len(comps) else 0.0
    st = T.stats()
    k = max(1, len(pts))
    return BenchReport(
        fixture=fixture, n=T.n, r=T.params.r, alpha=str(T.params.alpha), seed=seed, queries=len(pts),
        mean_comparisons=mean,
        p50_comparisons=float(np.percentile(comps, 50)) if len(comps) else 0.0,
        p90_comparisons=float(np.percentile(comps, 90)) if len(comps) else 0.0,
        p99_comparisons=float(np.percentile(comps, 99)) if len(comps) else 0.0,
        max_comparisons=int(comps.max()) if len(comps) else 0,
        terminal_fraction=term / k, backup_fraction=back / k, mean_depth=depth / k,
        leaf_entropy=h, pruned_leaf_entropy=pruned_leaf_entropy(T), log2_n=math.log2(max(1, T.n)),
        c_q=mean / (h + 1), nodes=st["nodes"], leaves=st["terminal_leaves"] + st["nonterminal_leaves"],
        max_children=st["max_children"], depth_cap=T.depth_cap, retries=st["retries"],
        build_failures=st["build_failures"],
    )


def write_csv(reports: Sequence[BenchReport], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_FIELDS, lineterminator="\n")
        w.writeheader()
        for rep in reports:
            w.writerow(rep.row())


def write_json(reports: Sequence[BenchReport], path, extra: dict | None = None) -> None:
    doc = {"reports": [rep.row() for rep in reports]}
    if extra:
        doc.update(extra)
    Path(path).write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
