"""Poisson approximation of the non-Pareto count near the critical dimension.

At n=2000, d=22 the count n-K is close to a Poisson law.  This script
simulates replicates, compares the empirical law with Poisson(exact mean),
and sets the observed total-variation distance beside the Stein-Chen (AGG)
certificate for the weighted count S.

Run: python demos/03_poisson_limit.py [reps]   (default 2000 replicates)
"""
import sys

from pareto_phase import experiment as ex
from pareto_phase import oracle

reps = int(sys.argv[1]) if len(sys.argv) > 1 else 2000
n, d = 2000, 22
summary = ex.run_simulation(ex.ExperimentConfig(n=n, d=d, reps=reps, master_seed=3))
agg = summary.aggregates
mv = agg["nonpareto"]
exact = agg["oracle"]["exact_E_nonpareto"]
print(f"n={n}, d={d}, {reps} replicates, implied c={agg['oracle']['c_star']:.4f}")
print(f"exact E(n-K) = {exact:.6f}; limit 2^-c = {agg['oracle']['limit_mean']:.6f}")
print(f"empirical mean {mv['mean']:.4f} +- {mv['se_mean']:.4f}, variance {mv['variance']:.4f} "
      f"+- {mv['se_variance']:.4f}")

dist = {int(k): v for k, v in agg["nonpareto_distribution"].items()}
print("\n k  empirical  Poisson(exact mean)")
for k in range(max(dist) + 1):
    print(f"{k:2d}  {dist.get(k, 0) / reps:9.4f}  {oracle.poisson_pmf(k, exact):9.4f}")

bound = oracle.agg_bound(n, d)
print(f"\nTV(empirical n-K, Poisson(E S)) = {agg['tv_distance']:.4f}")
print(f"AGG certificate for S: b1={bound.b1:.3g}, b2={bound.b2:.3g}, total={bound.total:.3g}")
print("b2 is dominated by pairs of points sharing a dominated or dominating point (3^-d terms);")
print("those clusters are also why Var(n-K) exceeds E(n-K) at this n.")
print(f"exact E K^(2) = {agg['oracle']['exact_EKr']['2']:.4f}, empirical mean of "
      f"sum_(r>=2) K^(r) = {agg['higher_layers']['mean']:.4f}")

print("\nverdicts:")
for name, v in agg["verdicts"].items():
    print(f"  {name:20s} passed={v['passed']}  statistic={v['statistic']:.4g}  threshold={v['threshold']:.4g}")
