"""Exhaustive crossing counts over the canonical test-line set.

Test lines pass through pairs of generator points and are perturbed
infinitesimally so that they avoid every generator: each of the two defining
points is pushed to one side (four sidings per pair).  Collinear generators
inherit the side given by linear interpolation along the line.  Crossing
counts of triangle interiors or segments only change when a line sweeps past
a generator, so the maximum over this finite family is the maximum over all
lines.
"""
from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np

from .geometry import Point, orient_sign_matrix, points_to_array

SIDINGS = ((1, -1), (-1, 1), (1, 1), (-1, -1))


class CrossingResult(NamedTuple):
    max_crossings: int
    test_line_count: int
    witness: tuple[int, int, int, int] | None  # (i, j, side_i, side_j)


def _collinear_before_mid(W: Sequence[Point], i: int, j: int, k: int) -> int:
    """-1 if k lies before the midpoint of W[i]W[j] along the line, +1 after, 0 at it."""
    a, b, p = W[i], W[j], W[k]
    dx, dy = b.x - a.x, b.y - a.y
    v = (2 * p.x - a.x - b.x) * dx + (2 * p.y - a.y - b.y) * dy
    return (v > 0) - (v < 0)


def sign_matrix(W: Sequence[Point], F: np.ndarray | None = None):
    """Pairs (I, J) and exact orientation signs of every generator against every pair line."""
    n = len(W)
    F = points_to_array(W) if F is None else F
    I, J = np.triu_indices(n, 1)
    S = orient_sign_matrix([W[i] for i in I], [W[j] for j in J], W, fa=F[I], fb=F[J], fp=F)
    return I, J, S


def _sided(W, I, J, S, rows: np.ndarray):
    """Yield (siding, side matrix) for the given line rows."""
    sub = S[rows].astype(np.int8)
    Ir, Jr = I[rows], J[rows]
    zl, zk = np.nonzero(sub == 0)
    mask = (zk != Ir[zl]) & (zk != Jr[zl])
    zl, zk = zl[mask], zk[mask]
    pos = np.array([_collinear_before_mid(W, int(Ir[l]), int(Jr[l]), int(k)) for l, k in zip(zl, zk)],
                   dtype=np.int8)
    ar = np.arange(len(rows))
    for si, sj in SIDINGS:
        side = sub.copy()
        if len(zl):
            if si == sj:
                side[zl, zk] = si
            else:
                # interpolated side: si before the midpoint, sj after, si at it
                side[zl, zk] = np.where(pos > 0, sj, si)
        side[ar, Ir] = si
        side[ar, Jr] = sj
        yield (si, sj), side


def max_crossings(W: Sequence[Point], items: Sequence[Sequence[int]], chunk: int = 4096):
    """Max over perturbed test lines of the number of items crossed.

    ``items`` are index tuples into W: pairs are segments (crossed when the
    endpoints are strictly separated), triples are triangles (crossed when the
    interior meets the line, i.e. corners not all on one side).
    """
    n = len(W)
    if n < 2 or not items:
        return CrossingResult(0, n * (n - 1) // 2 * len(SIDINGS), None)
    I, J, S = sign_matrix(W)
    segs = np.array([it for it in items if len(it) == 2], dtype=np.int64).reshape(-1, 2)
    tris = np.array([it for it in items if len(it) == 3], dtype=np.int64).reshape(-1, 3)
    best, witness = -1, None
    for start in range(0, len(I), chunk):
        rows = np.arange(start, min(start + chunk, len(I)))
        for (si, sj), side in _sided(W, I, J, S, rows):
            cnt = np.zeros(len(rows), dtype=np.int64)
            if len(segs):
                cnt += (side[:, segs[:, 0]] != side[:, segs[:, 1]]).sum(axis=1)
            if len(tris):
                a, b, c = side[:, tris[:, 0]], side[:, tris[:, 1]], side[:, tris[:, 2]]
                cnt += (~((a == b) & (b == c))).sum(axis=1)
            k = int(np.argmax(cnt))
            if cnt[k] > best:
                best = int(cnt[k])
                witness = (int(I[rows[k]]), int(J[rows[k]]), si, sj)
    return CrossingResult(best, len(I) * len(SIDINGS), witness)


def index_items(points_of_items: Sequence[Sequence[Point]]):
    """Deduplicate the points of geometric items; return generators and index tuples."""
    index: dict[Point, int] = {}
    W: list[Point] = []
    items = []
    for it in points_of_items:
        idx = []
        for p in it:
            k = index.get(p)
            if k is None:
                k = index[p] = len(W)
                W.append(p)
            idx.append(k)
        items.append(tuple(idx))
    return W, items
