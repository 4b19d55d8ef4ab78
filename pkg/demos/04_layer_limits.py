"""Layer counts K^(r), r >= 2, near the second critical dimension.

E K^(r) has a common threshold d** = e log n - (1/2) log log n.  Gamma-weighted
quadrature gives the exact finite-n value even at n = 1e8; the script prints
it next to the limiting constant and shows how slowly the ratio approaches 1
when d is restricted to integers.

Run: python demos/04_layer_limits.py
"""
from pareto_phase import oracle

print("   n        d    c_starstar   r   exact E K^(r)   limit      ratio")
for n in (10**4, 10**6, 10**8):
    d = oracle.round_dim(oracle.critical_dim_starstar(n))
    c = oracle.implied_offsets(n, d).c_starstar
    for r in (2, 3, 4):
        exact = oracle.expected_K_r(n, d, r)
        limit = oracle.limit_EKr(r, c)
        print(f"{n:9.0e}  {d:3d}  {c:+.4f}     {r}   {exact:13.6g}   {limit:8.4g}   {exact / limit:.4f}")

print("\nStirling factor (log n)^(d-1)/(d-1)! against exp(1/2-c)/sqrt(2 pi):")
for n in (1e6, 1e9, 1e12):
    x = oracle.critical_dim_starstar(n)
    for label, d in (("real d", x), ("rounded d", oracle.round_dim(x))):
        c = d - x
        ratio = oracle.stirling_factor(n, d) / oracle.stirling_limit(c)
        print(f"  n={n:.0e} {label:9s} d={d:8.3f}  ratio {ratio:.4f}")

print("\nExact rational cross-check at small n (alternating sum):")
for n, d, r in ((10, 4, 2), (40, 10, 3), (200, 12, 2)):
    print(f"  n={n}, d={d}, r={r}: quadrature {oracle.expected_K_r(n, d, r):.15g}, "
          f"exact {oracle.expected_K_r_alternating(n, d, r):.15g}")
