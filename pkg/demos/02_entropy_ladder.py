"""Query cost follows the entropy, not the subdivision size.

The islands ladder scatters n/4 diamond islands around an empty central
lake.  Almost all query mass lands in the lake, so the tree can answer most
queries at a leaf whose triangle lies inside one face.  As n grows 16-fold
the backup trapezoidal map gets deeper for points spread over the whole
square, but the mean cost of queries drawn from the measure stays put.
"""
import math
import time

from dsloc import analysis as an
from dsloc import fixtures as fx
from dsloc.geometry import UNIT_SQUARE
from dsloc.measure import sample_conditional_many
from dsloc.partition_tree import build_structure
from dsloc.trapezoid import backup_locate

print(f"{'n':>6} {'log2 n':>7} {'nodes':>6} {'H(L)':>6} {'mean cmp':>9} {'terminal':>9} "
      f"{'map depth':>10} {'build s':>8}")
for n in (256, 1024, 4096):
    t0 = time.time()
    S = build_structure(fx.islands_ladder(n), fx.skewed_lake())
    secs = time.time() - t0
    rep = an.run_benchmark(S, 5000, seed=1, fixture=f"islands{n}")
    # backup search depth for points spread uniformly over the square
    pts = sample_conditional_many(fx.uniform_square(), UNIT_SQUARE, 2000, 2)
    depth = sum(backup_locate(S.backup, p).depth for p in pts) / len(pts)
    print(f"{n:>6} {math.log2(n):>7.0f} {rep.nodes:>6} {rep.leaf_entropy:>6.2f} {rep.mean_comparisons:>9.2f} "
          f"{rep.terminal_fraction:>9.3f} {depth:>10.2f} {secs:>8.1f}")

print("\nMean comparisons stay flat while log2 n grows by 4.")
