"""Dominance counts, Pareto points, layer counts and box statistics.

A point dominates another when it is at least as large in every coordinate.
For each point we count how many other points it dominates; points with a
zero count are Pareto-minimal, and K^(r) counts points dominating exactly r
others.

Run: python demos/01_dominance_and_layers.py
"""
import time

import numpy as np

from pareto_phase.dominance import (
    BoxRegion,
    ProjectionSpec,
    SampleMatrix,
    box_statistics,
    dominance_counts,
    dominates,
)
from pareto_phase.sampling import StreamSpec, sample_uniform

# A hand-sized example: a chain of three points.
chain = SampleMatrix(np.array([[0.9, 0.9], [0.5, 0.6], [0.1, 0.2]]))
summary = dominance_counts(chain)
print("chain counts D(i):", summary.counts.tolist())
print("Pareto flags:", summary.pareto.tolist(), " K =", summary.K)
print("dominates([0.9, 0.8], [0.1, 0.2]) =", dominates([0.9, 0.8], [0.1, 0.2]))

# A random sample in moderate dimension: few points dominate anything.
sample = sample_uniform(2000, 22, StreamSpec(master_seed=7, replicate_index=0))
t0 = time.perf_counter()
fast = dominance_counts(sample, "sum-pruned")
t1 = time.perf_counter()
slow = dominance_counts(sample, "naive")
t2 = time.perf_counter()
assert np.array_equal(fast.counts, slow.counts)
print(f"\nn=2000, d=22: sum-pruned {1e3 * (t1 - t0):.1f} ms, naive {1e3 * (t2 - t1):.1f} ms, same counts")
print("non-Pareto count n-K =", fast.nonpareto)
print("layer histogram {r: K^(r)}:", {r: k for r, k in fast.layers.items() if k})

# Box statistics on the first coordinate: S weights each non-Pareto point by
# its count, T counts the points; both restricted to projections inside U.
box = BoxRegion(((0.0, 0.5),))
stats = box_statistics(sample, ProjectionSpec((1,)), box, fast)
print(f"\nU=[0,0.5] on coordinate 1: S={stats.S}, T={stats.T}, "
      f"projected points={np.round(stats.projected_points.ravel(), 3).tolist()}")

# Adding coordinates can only remove dominance relations.
print("\nn-K as the first d coordinates are used:")
for d in (4, 8, 12, 16, 20, 22):
    print(f"  d={d:2d}: {dominance_counts(sample.truncate(d)).nonpareto}")
