"""Where the non-Pareto points sit: projected positions and void probabilities.

Projecting non-Pareto points onto one coordinate gives, in the limit, a
Poisson process on [0, 1] with intensity proportional to x, so pooled atom
positions have cdf x^2.  The probability that no non-Pareto point projects
into U = [0, 0.5] tends to exp(-2^(1-c) / 8).

Run: python demos/05_spatial_law.py [reps]   (default 3000 replicates)
"""
import math
import sys

import numpy as np

from pareto_phase import experiment as ex
from pareto_phase import oracle
from pareto_phase.dominance import BoxRegion

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 3000
cfg = ex.ExperimentConfig(n=2000, d=22, reps=reps, master_seed=5, proj=(1,), box=((0.0, 0.5),))
summary = ex.run_simulation(cfg)
agg = summary.aggregates
atoms = np.array([a[0] for rec in summary.records for a in rec.atoms])
print(f"{len(atoms)} pooled atom positions from {reps} replicates")
print(" x     empirical cdf   x^2")
for x in (0.2, 0.4, 0.6, 0.8, 0.9):
    print(f"{x:.1f}   {np.mean(atoms <= x):.4f}          {x * x:.4f}")
ks = agg["verdicts"]["ks_coord_1"]
print(f"KS statistic {ks['statistic']:.4f} vs 5% threshold {ks['threshold']:.4f}: passed={ks['passed']}")

c = agg["oracle"]["c_star"]
box = BoxRegion(((0.0, 0.5),))
void = agg["verdicts"]["void_probability"]
print(f"\nvoid frequency of U=[0,0.5]: {agg['void_frequency']:.4f}")
print(f"limit exp(-intensity mass) at c={c:.4f}: {math.exp(-oracle.intensity_mass(box, c)):.4f}")
print(f"Poisson(E S(U)) void probability at n=2000: {math.exp(-oracle.expected_S(2000, 22, box)):.4f}")
print(f"Wilson check: passed={void['passed']} ({void['details']})")
