"""Statistical verdicts on replicate outputs against Poisson laws."""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy import stats

from .dominance import BoxRegion
from .errors import InvalidArgumentError
from .oracle import intensity_mass


@dataclass(frozen=True)
class EmpiricalDistribution:
    counts: dict
    total: int

    def __post_init__(self):
        if self.total < 1:
            raise InvalidArgumentError("empirical distribution needs at least one value")
        if sum(self.counts.values()) != self.total:
            raise InvalidArgumentError("frequencies must sum to total")

    @classmethod
    def from_values(cls, values: Iterable[int]) -> "EmpiricalDistribution":
        c = Counter(int(v) for v in values)
        if any(k < 0 for k in c):
            raise InvalidArgumentError("values must be non-negative integers")
        return cls(dict(sorted(c.items())), sum(c.values()))

    @property
    def max_value(self) -> int:
        return max(self.counts)

    def pmf(self, k: int) -> float:
        return self.counts.get(k, 0) / self.total

    def frequencies(self) -> np.ndarray:
        """Frequencies for ``0..max_value`` as an integer array."""
        out = np.zeros(self.max_value + 1, dtype=np.int64)
        for k, v in self.counts.items():
            out[k] = v
        return out


@dataclass(frozen=True)
class TestVerdict:
    name: str
    statistic: float
    threshold: float
    passed: Optional[bool]  # None when the test is not applicable
    p_value: Optional[float] = None
    details: str = ""

    __test__ = False  # keep pytest from collecting this class

    @property
    def applicable(self) -> bool:
        return self.passed is not None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "p_value": self.p_value,
            "passed": self.passed,
            "details": self.details,
        }


def tv_distance(emp: EmpiricalDistribution, mean: float) -> float:
    """Total variation distance between ``emp`` and Poisson(mean).

    The Poisson mass beyond the largest observed value is added in closed form.
    """
    top = emp.max_value
    ks = np.arange(top + 1)
    pois = stats.poisson.pmf(ks, mean)
    diff = np.abs(emp.frequencies() / emp.total - pois).sum()
    tail = stats.poisson.sf(top, mean)
    return float(min(1.0, 0.5 * (diff + tail)))


def _pool_cells(expected: np.ndarray, observed: np.ndarray, min_expected: float):
    # Left to right: close a cell once its expected count reaches the floor.
    # The last cell is the open tail and absorbs any short remainder.
    exp_cells, obs_cells = [], []
    e_acc = o_acc = 0.0
    for e, o in zip(expected, observed):
        e_acc += e
        o_acc += o
        if e_acc >= min_expected:
            exp_cells.append(e_acc)
            obs_cells.append(o_acc)
            e_acc = o_acc = 0.0
    if exp_cells:
        exp_cells[-1] += e_acc
        obs_cells[-1] += o_acc
        if exp_cells[-1] < min_expected and len(exp_cells) > 1:
            e = exp_cells.pop()
            o = obs_cells.pop()
            exp_cells[-1] += e
            obs_cells[-1] += o
    return np.array(exp_cells), np.array(obs_cells)


def chi_square_poisson(emp: EmpiricalDistribution, mean: float,
                       min_expected_cell: float = 5.0, level: float = 0.01) -> TestVerdict:
    """Pearson goodness of fit of ``emp`` to Poisson(mean), pooled cells."""
    top = max(emp.max_value, int(mean + 10 * math.sqrt(mean) + 10))
    ks = np.arange(top + 1)
    probs = stats.poisson.pmf(ks, mean)
    probs[-1] += stats.poisson.sf(top, mean)
    observed = np.zeros(top + 1)
    observed[: emp.max_value + 1] = emp.frequencies()
    expected = emp.total * probs
    exp_cells, obs_cells = _pool_cells(expected, observed, min_expected_cell)
    if len(exp_cells) < 2:
        return TestVerdict("chi_square_poisson", math.nan, math.nan, None,
                           details=f"{len(exp_cells)} cell(s) after pooling")
    statistic = float(((obs_cells - exp_cells) ** 2 / exp_cells).sum())
    dof = len(exp_cells) - 1
    critical = float(stats.chi2.isf(level, dof))
    p_value = float(stats.chi2.sf(statistic, dof))
    return TestVerdict("chi_square_poisson", statistic, critical, statistic <= critical,
                       p_value, f"{len(exp_cells)} cells, dof={dof}, level={level}")


def ks_statistic(points: np.ndarray, cdf) -> float:
    x = np.sort(np.asarray(points, dtype=float))
    n = len(x)
    f = cdf(x)
    upper = np.arange(1, n + 1) / n - f
    lower = f - np.arange(n) / n
    return float(max(upper.max(), lower.max()))


def ks_projected_marginal(points: Sequence[float], level: float = 0.05,
                          interval: tuple = (0.0, 1.0)) -> TestVerdict:
    """One-sample KS of atom coordinates against the density proportional to x.

    On ``[a, b]`` the cdf is ``(x^2 - a^2) / (b^2 - a^2)``; on ``[0, 1]``
    this is ``x^2``.  The threshold is the asymptotic Kolmogorov quantile.
    """
    x = np.asarray(points, dtype=float).ravel()
    n = len(x)
    if n < 10:
        return TestVerdict("ks_projected_marginal", math.nan, math.nan, None,
                           details=f"{n} points, need at least 10")
    a, b = interval

    def cdf(v):
        return np.clip((v * v - a * a) / (b * b - a * a), 0.0, 1.0)

    stat = ks_statistic(x, cdf)
    threshold = float(stats.kstwobign.isf(level)) / math.sqrt(n)
    p_value = float(stats.kstwobign.sf(stat * math.sqrt(n)))
    return TestVerdict("ks_projected_marginal", stat, threshold, stat <= threshold, p_value,
                       f"N={n}, level={level}")


def wilson_interval(successes: int, trials: int, confidence: float = 0.997):
    z = float(stats.norm.isf((1.0 - confidence) / 2.0))
    p = successes / trials
    denom = 1.0 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials)) / denom
    return centre - half, centre + half


def void_probability_check(void_indicators: Sequence[bool], box: BoxRegion, c: float,
                           confidence: float = 0.997,
                           target: Optional[float] = None) -> TestVerdict:
    """Empirical P(T(U) = 0) against ``exp(-lambda^m(U))`` with a Wilson band.

    ``target`` overrides the limiting void probability, e.g. with a finite-n value.
    """
    flags = np.asarray(void_indicators, dtype=bool)
    if len(flags) < 100:
        raise InvalidArgumentError(f"need at least 100 replicates, got {len(flags)}")
    if target is None:
        target = math.exp(-intensity_mass(box, c))
    hits = int(flags.sum())
    lo, hi = wilson_interval(hits, len(flags), confidence)
    freq = hits / len(flags)
    return TestVerdict("void_probability", freq, target, lo <= target <= hi,
                       details=f"Wilson {confidence:.1%} interval [{lo:.5f}, {hi:.5f}]")


@dataclass(frozen=True)
class MeanVarianceSummary:
    count: int
    mean: float
    variance: float
    se_mean: float
    se_variance: float
    se_difference: float  # jackknife SE of mean - variance

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "mean": self.mean,
            "variance": self.variance,
            "se_mean": self.se_mean,
            "se_variance": self.se_variance,
            "se_difference": self.se_difference,
        }


def mean_variance_summary(values: Sequence[float]) -> MeanVarianceSummary:
    """Sample mean, unbiased variance and jackknife standard errors of both."""
    x = np.asarray(values, dtype=float)
    n = len(x)
    if n < 2:
        raise InvalidArgumentError("need at least two values")
    mean = float(x.mean())
    y = x - mean
    s2 = float(y @ y)
    variance = s2 / (n - 1)
    # Leave-one-out means are exact linear functions; their jackknife SE
    # equals sqrt(variance / n).
    se_mean = math.sqrt(variance / n)
    if n < 3:
        return MeanVarianceSummary(n, mean, variance, se_mean, math.nan, math.nan)
    # Leave-one-out statistics, shifted by the full-sample mean.
    loo_mean = -y / (n - 1)
    loo_var = (s2 - y * y - (n - 1) * loo_mean * loo_mean) / (n - 2)
    return MeanVarianceSummary(n, mean, variance, se_mean,
                               _jackknife_se(loo_var), _jackknife_se(loo_mean - loo_var))


def _jackknife_se(loo: np.ndarray) -> float:
    n = len(loo)
    dev = loo - loo.mean()
    return math.sqrt((n - 1) / n * float(dev @ dev))
