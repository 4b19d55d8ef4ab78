"""Exact finite-n expectations, limit constants and critical dimensions.

All expectations reduce to one-dimensional integrals against the law of
``|X| = prod_k X^k``.  For uniform coordinates ``|X| = exp(-G)`` with
``G ~ Gamma(d, 1)``, and the factor ``exp(-s G)`` is absorbed into the
weight by switching to ``Gamma(d, 1 + s)`` at the cost of ``(1 + s)^-d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .dominance import BoxRegion
from .errors import InvalidArgumentError
from .quadrature import gamma_expectation

BETA = 2.0 / math.log(2.0)
E = math.e
ALTERNATING_MAX_N = 200


# ---------------------------------------------------------------- regimes

def critical_dim_star(n: float, c: float = 0.0) -> float:
    """``(2 / log 2) log n + c``: the non-Pareto threshold."""
    if n < 2:
        raise InvalidArgumentError(f"critical_dim_star needs n >= 2, got {n}")
    return BETA * math.log(n) + c


def critical_dim_starstar(n: float, c: float = 0.0) -> float:
    """``e log n - (1/2) log log n + c``: the common threshold of E K^(r), r >= 2."""
    if n < 3:
        raise InvalidArgumentError(f"critical_dim_starstar needs n >= 3, got {n}")
    ln = math.log(n)
    return E * ln - 0.5 * math.log(ln) + c


def round_dim(x: float) -> int:
    """Nearest integer with halves rounded up, so ``d - x`` lies in (-1/2, 1/2]."""
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class RegimeOffset:
    n: float
    d: int
    c_star: Optional[float]
    c_starstar: Optional[float]


def implied_offsets(n: float, d: int) -> RegimeOffset:
    c_star = d - critical_dim_star(n) if n >= 2 else None
    c_starstar = d - critical_dim_starstar(n) if n >= 3 else None
    return RegimeOffset(n, d, c_star, c_starstar)


# ------------------------------------------------------------ box integrals

def box_product_integral(box: BoxRegion) -> float:
    """Integral of the coordinate product over the box: prod (b^2 - a^2) / 2."""
    return math.prod((hi * hi - lo * lo) / 2.0 for lo, hi in box.bounds)


def intensity_mass(box: BoxRegion, c: float) -> float:
    """Mass ``2^(m - c) * int_U |x| dx`` of the limiting Poisson intensity."""
    return 2.0 ** (box.m - c) * box_product_integral(box)


def pair_probability(d: int, box: Optional[BoxRegion] = None) -> float:
    """P(X_j below X_i and the projection of X_i in U) = 2^(m - d) int_U |x| dx."""
    if box is None:
        return 2.0 ** (-d)
    if box.m > d:
        raise InvalidArgumentError(f"box dimension {box.m} exceeds d={d}")
    return 2.0 ** (box.m - d) * box_product_integral(box)


# ------------------------------------------------------- exact expectations

def _log_binom(n: int, k: int) -> float:
    # lgamma loses ~1e-16 * log(n!) absolutely, which is visible for n ~ 1e8.
    if min(k, n - k) <= 64:
        return math.log(math.comb(n, k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _check_nd(n, d):
    if n < 1 or d < 1:
        raise InvalidArgumentError(f"need n >= 1 and d >= 1, got n={n}, d={d}")


def _log_ratio(t, g, log_slope):
    # log(g(x) / x) at x = exp(-t), where g(x) ~ slope * x as x -> 0.
    t = np.asarray(t, dtype=float)
    out = np.full_like(t, log_slope)
    live = t < 700.0
    x = np.exp(-t[live])
    out[live] = np.log(g(x)) + t[live]
    return out


def expected_K_r(n: int, d: int, r: int) -> float:
    """E K^(r) for ``r >= 1``; ``r = 0`` returns E K (the Pareto count).

    ``n C(n-1, r) E[|X|^r (1 - |X|)^(n-1-r)]`` by Gamma-weighted quadrature.
    """
    _check_nd(n, d)
    if not 0 <= r <= n - 1:
        raise InvalidArgumentError(f"need 0 <= r <= n-1, got r={r}, n={n}")
    if d == 1:
        return 1.0
    power = n - 1 - r

    def log_f(t):
        return power * np.log1p(-np.exp(-t))

    mean = gamma_expectation(log_f, d, rate=r + 1.0)
    return math.exp(math.log(n) + _log_binom(n - 1, r) - d * math.log(r + 1.0)) * mean


def expected_nonpareto(n: int, d: int) -> float:
    """E(n - K) computed directly, avoiding the cancellation in ``n - E K``."""
    _check_nd(n, d)
    if d == 1:
        return float(n - 1)
    if n == 1:
        return 0.0

    # 1 - (1 - x)^(n-1) = x * h(x); pull x = exp(-G) into a Gamma(d, 2) weight.
    def log_f(t):
        return _log_ratio(t, lambda x: -np.expm1((n - 1) * np.log1p(-x)), math.log(n - 1))

    return n * 2.0 ** (-d) * gamma_expectation(log_f, d, rate=2.0)


def expected_K(n: int, d: int) -> float:
    return n - expected_nonpareto(n, d)


def expected_S(n: int, d: int, box: Optional[BoxRegion] = None) -> float:
    """Exact mean ``n (n-1) 2^(m-d) int_U |x| dx`` of the weighted count S."""
    _check_nd(n, d)
    return n * (n - 1) * pair_probability(d, box)


# Poissonized sample size: the points form a Poisson process of intensity lam.

def expected_nonpareto_poissonized(lam: float, d: int) -> float:
    """E(N - K) with N ~ Poisson(lam): ``lam E[1 - exp(-lam |X|)]``."""
    if not lam > 0:
        raise InvalidArgumentError(f"intensity must be positive, got {lam}")
    _check_nd(1, d)

    def log_f(t):
        return _log_ratio(t, lambda x: -np.expm1(-lam * x), math.log(lam))

    return lam * 2.0 ** (-d) * gamma_expectation(log_f, d, rate=2.0)


def expected_K_r_poissonized(lam: float, d: int, r: int) -> float:
    """E K^(r) with N ~ Poisson(lam): ``lam E[(lam |X|)^r exp(-lam |X|) / r!]``."""
    if not lam > 0:
        raise InvalidArgumentError(f"intensity must be positive, got {lam}")
    _check_nd(1, d)
    if r < 0:
        raise InvalidArgumentError(f"need r >= 0, got {r}")

    def log_f(t):
        return -lam * np.exp(-t)

    pref = (r + 1) * math.log(lam) - math.lgamma(r + 1) - d * math.log(r + 1.0)
    return math.exp(pref) * gamma_expectation(log_f, d, rate=r + 1.0)


def expected_S_poissonized(lam: float, d: int, box: Optional[BoxRegion] = None) -> float:
    return lam * lam * pair_probability(d, box)


# ---------------------------------------------------- exact rational checks

def expected_K_r_alternating(n: int, d: int, r: int) -> float:
    """Same quantity as :func:`expected_K_r` by exact rational arithmetic.

    Binomial expansion of ``(1 - |X|)^(n-1-r)`` with ``E|X|^j = (j+1)^-d``.
    Limited to ``n <= 200`` to keep the rationals small.
    """
    _check_nd(n, d)
    if not 0 <= r <= n - 1:
        raise InvalidArgumentError(f"need 0 <= r <= n-1, got r={r}, n={n}")
    if n > ALTERNATING_MAX_N:
        raise InvalidArgumentError(f"alternating sum limited to n <= {ALTERNATING_MAX_N}")
    return float(_alternating_exact(n, d, r))


def _alternating_exact(n, d, r):
    m = n - 1 - r
    total = Fraction(0)
    for k in range(m + 1):
        term = Fraction(math.comb(m, k), (r + 1 + k) ** d)
        total += term if k % 2 == 0 else -term
    return n * math.comb(n - 1, r) * total


def expected_nonpareto_alternating(n: int, d: int) -> float:
    if n > ALTERNATING_MAX_N:
        raise InvalidArgumentError(f"alternating sum limited to n <= {ALTERNATING_MAX_N}")
    _check_nd(n, d)
    return float(n - _alternating_exact(n, d, 0))


# ------------------------------------------------------------------ limits

def stirling_factor(n: float, d: float) -> float:
    """``(log n)^(d-1) / Gamma(d)``; tends to ``exp(1/2 - c) / sqrt(2 pi)`` at d**.

    ``d`` may be real, which isolates the limit from integer rounding of d.
    """
    if n <= 1:
        raise InvalidArgumentError(f"need n > 1, got {n}")
    if d < 1:
        raise InvalidArgumentError(f"need d >= 1, got {d}")
    if d == 1:
        return 1.0
    return math.exp((d - 1) * math.log(math.log(n)) - math.lgamma(d))


def stirling_limit(c: float) -> float:
    return math.exp(0.5 - c) / math.sqrt(2.0 * math.pi)


def limit_EKr(r: int, c: float) -> float:
    """Limit of E K^(r) when ``d - d**(n) -> c``; valid for ``r >= 2``."""
    if r < 2:
        raise InvalidArgumentError(f"limit_EKr needs r >= 2, got {r}")
    return stirling_limit(c) * math.exp(math.lgamma(r + 1 - E) - math.lgamma(r + 1))


def limit_nonpareto_mean(c: float) -> float:
    return 2.0 ** (-c)


def nonpareto_coordinate_cdf(n: int, d: int, x) -> np.ndarray:
    """Exact finite-n cdf of one coordinate of a non-Pareto point.

    A point with first coordinate ``t`` and remaining product ``Y`` is
    non-Pareto with probability ``1 - (1 - tY)^(n-1)``; integrating over
    ``t <= x`` gives ``x - (1 - (1 - xY)^n) / (nY)``, averaged over ``Y``.
    As ``n -> infinity`` at the critical dimension this tends to ``x^2``.
    """
    _check_nd(n, d)
    if n < 2:
        raise InvalidArgumentError(f"need n >= 2, got {n}")

    def log_mass(x, t):
        # log E-integrand at Y = exp(-t); series where x Y is tiny.
        t = np.asarray(t, dtype=float)
        p = x * np.exp(-t)
        out = np.empty_like(t)
        small = n * p < 1e-4
        ps = p[small]
        out[small] = (math.log((n - 1) / 2.0) + 2.0 * math.log(x) - t[small]
                      + np.log1p(-(n - 2) * ps / 3.0))
        pb, yb = p[~small], np.exp(-t[~small])
        with np.errstate(divide="ignore"):  # log1p(-1) = -inf is fine at x Y = 1
            out[~small] = np.log(x + np.expm1(n * np.log1p(-pb)) / (n * yb))
        return out

    def mass(x):
        if x <= 0.0:
            return 0.0
        if d == 1:
            return float(np.exp(log_mass(x, np.zeros(1)))[0])
        return gamma_expectation(lambda t: log_mass(x, t), d - 1)

    xs = np.clip(np.atleast_1d(np.asarray(x, dtype=float)), 0.0, 1.0)
    total = mass(1.0)
    return np.array([mass(v) / total for v in xs])


def poisson_pmf(k: int, mean: float) -> float:
    if not mean > 0:
        raise InvalidArgumentError(f"Poisson mean must be positive, got {mean}")
    if k < 0:
        return 0.0
    return math.exp(k * math.log(mean) - mean - math.lgamma(k + 1))


# ----------------------------------------------------------- Stein-Chen

@dataclass(frozen=True)
class AggBound:
    """Arratia-Goldstein-Gordon terms for S against Poisson(poisson_mean)."""

    b1: float
    b2: float
    poisson_mean: float

    @property
    def total(self) -> float:
        return self.b1 + self.b2


def agg_bound(n: float, d: int, box: Optional[BoxRegion] = None) -> AggBound:
    """Dependency-neighbourhood bound for the weighted count S.

    Neighbourhoods of an ordered pair hold ``4n - 6`` pairs.  ``b2`` uses the
    box-free joint probabilities: ``3^-d`` for the two configurations sharing
    the dominated or dominating point, ``6^-d`` for the two chains, and 0 for
    the reversed pair.  ``total`` bounds the total-variation distance.
    """
    if n < 2:
        raise InvalidArgumentError(f"need n >= 2, got {n}")
    p = pair_probability(d, box)
    pairs = n * (n - 1)
    b1 = pairs * (4 * n - 6) * p * p
    b2 = pairs * 2 * (n - 2) * (3.0 ** (-d) + 6.0 ** (-d))
    return AggBound(b1, b2, pairs * p)


# ------------------------------------------------------------- report

@dataclass
class OracleReport:
    n: float
    d: int
    offsets: RegimeOffset
    exact_EK: float
    exact_E_nonpareto: float
    exact_EKr: dict
    expected_S: float
    limit_mean: Optional[float]
    limit_EKr: dict
    stirling_factor: Optional[float]
    agg_bound: Optional[AggBound]
    poissonized: bool = False
    box: Optional[BoxRegion] = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        agg = self.agg_bound
        return {
            "n": self.n,
            "d": self.d,
            "poissonized": self.poissonized,
            "box": [list(b) for b in self.box.bounds] if self.box else None,
            "c_star": self.offsets.c_star,
            "c_starstar": self.offsets.c_starstar,
            "exact_EK": self.exact_EK,
            "exact_E_nonpareto": self.exact_E_nonpareto,
            "exact_EKr": {str(r): v for r, v in self.exact_EKr.items()},
            "expected_S": self.expected_S,
            "limit_mean": self.limit_mean,
            "limit_EKr": {str(r): v for r, v in self.limit_EKr.items()},
            "stirling_factor": self.stirling_factor,
            "agg_bound": None if agg is None else {
                "b1": agg.b1, "b2": agg.b2, "total": agg.total,
                "poisson_mean": agg.poisson_mean,
            },
            **self.extra,
        }


def oracle_report(n: float, d: int, r_max: int = 3, box: Optional[BoxRegion] = None,
                  poissonized: bool = False) -> OracleReport:
    """Every closed-form quantity for one ``(n, d)``; ``n`` is the intensity if poissonized."""
    if poissonized:
        nonpareto = expected_nonpareto_poissonized(n, d)
        ekr = {r: expected_K_r_poissonized(n, d, r) for r in range(1, r_max + 1)}
        es = expected_S_poissonized(n, d, box)
    else:
        n = int(n)
        nonpareto = expected_nonpareto(n, d)
        ekr = {r: expected_K_r(n, d, r) for r in range(1, min(r_max, n - 1) + 1)}
        es = expected_S(n, d, box)
    offsets = implied_offsets(n, d)
    limit_ekr = {}
    if offsets.c_starstar is not None:
        limit_ekr = {r: limit_EKr(r, offsets.c_starstar) for r in range(2, r_max + 1)}
    return OracleReport(
        n=n,
        d=d,
        offsets=offsets,
        exact_EK=n - nonpareto,
        exact_E_nonpareto=nonpareto,
        exact_EKr=ekr,
        expected_S=es,
        limit_mean=None if offsets.c_star is None else limit_nonpareto_mean(offsets.c_star),
        limit_EKr=limit_ekr,
        stirling_factor=stirling_factor(n, d) if n > 1 else None,
        agg_bound=agg_bound(n, d, box) if n >= 2 else None,
        poissonized=poissonized,
        box=box,
    )
