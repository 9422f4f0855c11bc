"""Measure partitions with exact certificates.

A measure partition is an ordered list of triangles.  Cell i is triangle i
minus everything covered earlier.  The builder samples the measure, partitions
the sample, swaps the last triangle for one covering the whole support, and
accepts the result only when exact rational arithmetic confirms that every
cell carries at most 3/r of the mass.
"""
from gmpy2 import mpq

from dsloc import fixtures as fx
from dsloc.simplicial import (PartitionParams, build_measure_partition, crossing_budget, incremental_cell_masses,
                              paper_sample_size)
from dsloc.testlines import index_items, max_crossings

D = fx.skewed_99_1()
print("Measure: 99% of the mass on a tiny triangle, 1% on a large one.\n")

for r in (2, 4, 8):
    print(f"r = {r}: uncapped sample size would be {paper_sample_size(r)}; "
          f"we use {PartitionParams().sample_size(r)}")
    seq, retries = build_measure_partition(D, r, PartitionParams(), rng=0)
    masses = incremental_cell_masses(D, seq)
    W, items = index_items(seq.triangles)
    cr = max_crossings(W, items)
    print(f"  {seq.r} triangles after {retries} retries")
    print(f"  cell masses: {', '.join(f'{float(m):.4f}' for m in masses)}")
    ok = max(masses) <= mpq(3, r)
    print(f"  sum is exactly {sum(masses)}; largest cell {float(max(masses)):.4f} <= 3/r = {mpq(3, r)} "
          f"(checked on exact rationals): {ok}")
    print(f"  worst line meets {cr.max_crossings} triangle interiors "
          f"({cr.test_line_count} test lines; budget {crossing_budget(r, 5):.1f})\n")
