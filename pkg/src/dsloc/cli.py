"""Command-line front end: build, query, verify, bench, render, fixture.

Exit codes: 0 success, 1 bad input or I/O failure, 2 the root partition could
not be built, 3 verification found a violation, 64 usage error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import analysis
from . import fixtures as fx
from .geometry import Point, to_q
from .measure import MeasureFormatError, load_measure, save_measure
from .partition_tree import (TreeParams, build_structure, load_structure, save_structure, verify_structure)
from .simplicial import STRATEGIES, PartitionFailed
from .subdivision import InvalidFaces, NonPlanarInput, ParseError, load_subdivision, save_subdivision
from .svg import render_node

EXIT_OK, EXIT_INPUT, EXIT_PARTITION, EXIT_VERIFY, EXIT_USAGE = 0, 1, 2, 3, 64
INPUT_ERRORS = (ParseError, MeasureFormatError, NonPlanarInput, InvalidFaces, OSError, ValueError, KeyError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(lo):
    def conv(s):
        try:
            v = int(s)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}")
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be >= {lo}, got {v}")
        return v
    return conv


def _alpha(s):
    try:
        a = Fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational like 1/4, got {s!r}")
    if not (0 < a < Fraction(1, 2)):
        raise argparse.ArgumentTypeError("alpha must lie strictly between 0 and 1/2")
    return a


def _positive_float(s):
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _rational(s):
    try:
        return to_q(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"expected a rational such as 1/3 or 0.25, got {s!r}")


def _m_cap(s):
    if s.lower() in ("none", "paper"):
        return None
    return _positive_int(1)(s)


def _add_build_flags(p):
    d = TreeParams()
    p.add_argument("--r", type=_positive_int(2), default=d.r, help="partition size per node (default %(default)s)")
    p.add_argument("--alpha", type=_alpha, default=d.alpha, help="depth constant, 0 < alpha < 1/2 (default 1/4)")
    p.add_argument("--seed", type=int, default=d.seed)
    p.add_argument("--m-cap", type=_m_cap, default=d.m_cap,
                   help="sample size cap; 'none' uses the uncapped sample size (default %(default)s)")
    p.add_argument("--max-retries", type=_positive_int(0), default=d.max_retries)
    p.add_argument("--c-cross", type=_positive_float, default=d.c_cross)
    p.add_argument("--c-stab", type=_positive_float, default=d.c_stab)
    p.add_argument("--strategy", choices=STRATEGIES, default=d.strategy)


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="dsloc", description="Distribution-sensitive planar point location.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    b = sub.add_parser("build", help="build the search structure for a subdivision and a measure")
    b.add_argument("subdivision")
    b.add_argument("measure")
    b.add_argument("-o", "--out", required=True, help="structure file (JSON)")
    b.add_argument("--stats", help="also write tree statistics (JSON) here")
    _add_build_flags(b)

    q = sub.add_parser("query", help="locate one point")
    q.add_argument("structure")
    q.add_argument("x", type=_rational)
    q.add_argument("y", type=_rational)

    v = sub.add_parser("verify", help="re-run all exact invariant checks")
    v.add_argument("structure")
    v.add_argument("--skip-partitions", action="store_true", help="skip the per-node partition re-verification")

    bn = sub.add_parser("bench", help="query-cost benchmark; one CSV row per structure")
    bn.add_argument("structures", nargs="+")
    bn.add_argument("--queries", type=_positive_int(1), default=10_000)
    bn.add_argument("--seed", type=int, default=0)
    bn.add_argument("--csv", help="CSV report path")
    bn.add_argument("--json", help="JSON report path")

    r = sub.add_parser("render", help="layered SVG of one tree node")
    r.add_argument("structure")
    r.add_argument("--node", type=int, default=0)
    r.add_argument("-o", "--out", required=True)

    f = sub.add_parser("fixture", help="write a built-in subdivision and measure to JSON files")
    f.add_argument("name", choices=sorted(list(fx.FIXTURES) + ["islands"]))
    f.add_argument("--n", type=_positive_int(4), default=256, help="vertex count for the islands ladder")
    f.add_argument("--measure", choices=["uniform", "skewed", "disconnected", "heavy"], default="uniform")
    f.add_argument("--dir", default=".", help="output directory")
    return ap


def _err(msg):
    print(f"dsloc: {msg}", file=sys.stderr)


def cmd_build(a) -> int:
    try:
        G = load_subdivision(a.subdivision)
        D = load_measure(a.measure)
    except INPUT_ERRORS as exc:
        _err(f"cannot read input: {exc}")
        return EXIT_INPUT
    params = TreeParams(r=a.r, alpha=a.alpha, seed=a.seed, m_cap=a.m_cap, max_retries=a.max_retries,
                        c_cross=a.c_cross, c_stab=a.c_stab, strategy=a.strategy)
    try:
        S = build_structure(G, D, params)
    except PartitionFailed as exc:
        _err(f"root partition failed: {exc}")
        return EXIT_PARTITION
    try:
        save_structure(S, a.out)
        if a.stats:
            st = {"params": params.to_dict(), **S.tree.stats(), "backup": S.backup.stats()}
            Path(a.stats).write_text(json.dumps(st, indent=1, sort_keys=True) + "\n")
    except OSError as exc:
        _err(f"cannot write output: {exc}")
        return EXIT_INPUT
    st = S.tree.stats()
    print(f"nodes={st['nodes']} terminal_leaves={st['terminal_leaves']} "
          f"nonterminal_leaves={st['nonterminal_leaves']} depth_cap={st['depth_cap']} n={st['n']}")
    return EXIT_OK


def _load(path):
    try:
        return load_structure(path)
    except INPUT_ERRORS as exc:
        _err(f"cannot read structure: {exc}")
        return None


def cmd_query(a) -> int:
    S = _load(a.structure)
    if S is None:
        return EXIT_INPUT
    label, st = S.locate(Point(a.x, a.y))
    print(f"{label} comparisons={st.comparisons} depth={st.depth} "
          f"terminal={str(st.terminal).lower()} backup={str(st.used_backup).lower()}")
    return EXIT_OK


def cmd_verify(a) -> int:
    S = _load(a.structure)
    if S is None:
        return EXIT_INPUT
    bad = verify_structure(S, check_partitions=not a.skip_partitions)
    for v in bad:
        print(f"VIOLATION {v.node}: {v.message}")
    if bad:
        return EXIT_VERIFY
    print(f"ok: {len(S.tree.nodes)} nodes verified")
    return EXIT_OK


def cmd_bench(a) -> int:
    reports = []
    for path in a.structures:
        S = _load(path)
        if S is None:
            return EXIT_INPUT
        reports.append(analysis.run_benchmark(S, a.queries, a.seed, fixture=Path(path).stem))
    try:
        if a.csv:
            analysis.write_csv(reports, a.csv)
        if a.json:
            analysis.write_json(reports, a.json)
    except OSError as exc:
        _err(f"cannot write report: {exc}")
        return EXIT_INPUT
    for rep in reports:
        print(f"{rep.fixture}: n={rep.n} mean_comparisons={rep.mean_comparisons:.3f} "
              f"H(L)={rep.leaf_entropy:.3f} C_q={rep.c_q:.3f} terminal={rep.terminal_fraction:.3f}")
    return EXIT_OK


def cmd_render(a) -> int:
    S = _load(a.structure)
    if S is None:
        return EXIT_INPUT
    try:
        text = render_node(S, a.node)
    except KeyError as exc:
        _err(str(exc.args[0]))
        return EXIT_INPUT
    try:
        Path(a.out).write_text(text)
    except OSError as exc:
        _err(f"cannot write {a.out}: {exc}")
        return EXIT_INPUT
    return EXIT_OK


def cmd_fixture(a) -> int:
    G = fx.islands_ladder(a.n) if a.name == "islands" else fx.FIXTURES[a.name]()
    if a.measure == "uniform":
        D = fx.uniform_square()
    elif a.measure == "skewed":
        D = fx.skewed_lake()
    elif a.measure == "disconnected":
        D = fx.disconnected_support()
    else:
        D = fx.island_heavy(G, G.faces[0].label)
    out = Path(a.dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        stem = f"{a.name}{a.n}" if a.name == "islands" else a.name
        save_subdivision(G, out / f"{stem}.subdivision.json")
        save_measure(D, out / f"{stem}.{a.measure}.measure.json")
    except OSError as exc:
        _err(str(exc))
        return EXIT_INPUT
    print(out / f"{stem}.subdivision.json")
    print(out / f"{stem}.{a.measure}.measure.json")
    return EXIT_OK


COMMANDS = {"build": cmd_build, "query": cmd_query, "verify": cmd_verify, "bench": cmd_bench,
            "render": cmd_render, "fixture": cmd_fixture}


def main(argv=None) -> int:
    a = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if a.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    return COMMANDS[a.cmd](a)


if __name__ == "__main__":
    sys.exit(main())
