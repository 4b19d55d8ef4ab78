import math

import numpy as np
import pytest
from scipy import stats

from pareto_phase.diagnostics import (
    EmpiricalDistribution,
    chi_square_poisson,
    ks_projected_marginal,
    mean_variance_summary,
    tv_distance,
    void_probability_check,
    wilson_interval,
)
from pareto_phase.dominance import BoxRegion
from pareto_phase.errors import InvalidArgumentError


def rate_band(level, runs):
    """Nominal rejection rate +- 3 binomial standard deviations."""
    sd = math.sqrt(level * (1 - level) / runs)
    return level - 3 * sd, level + 3 * sd


# ----------------------------------------------------------- distributions

def test_empirical_distribution():
    emp = EmpiricalDistribution.from_values([0, 2, 2, 5])
    assert emp.total == 4 and emp.max_value == 5
    assert emp.pmf(2) == 0.5 and emp.pmf(3) == 0.0
    assert emp.frequencies().tolist() == [1, 0, 2, 0, 0, 1]
    with pytest.raises(InvalidArgumentError):
        EmpiricalDistribution.from_values([])
    with pytest.raises(InvalidArgumentError):
        EmpiricalDistribution.from_values([-1])
    with pytest.raises(InvalidArgumentError):
        EmpiricalDistribution({0: 2}, 3)


# --------------------------------------------------------------------- TV

def test_tv_examples():
    mu = 0.8
    assert tv_distance(EmpiricalDistribution({0: 10}, 10), mu) == pytest.approx(1 - math.exp(-mu))
    # Frequencies proportional to the pmf (up to rounding) give a TV near 0.
    total = 10**9
    counts = {k: int(round(total * stats.poisson.pmf(k, 1.0))) for k in range(25)}
    emp = EmpiricalDistribution(counts, sum(counts.values()))
    assert tv_distance(emp, 1.0) < 1e-8


def test_tv_bounds():
    rng = np.random.default_rng(0)
    for _ in range(100):
        emp = EmpiricalDistribution.from_values(rng.integers(0, 30, size=rng.integers(1, 50)))
        assert 0.0 <= tv_distance(emp, rng.uniform(0.1, 20)) <= 1.0


def test_tv_null_calibration():
    rng = np.random.default_rng(1)
    tvs = [tv_distance(EmpiricalDistribution.from_values(rng.poisson(1.0, 20000)), 1.0)
           for _ in range(200)]
    assert np.mean(np.array(tvs) < 0.02) >= 0.99


# ------------------------------------------------------------- chi-square

def test_chi_square_perfect_match():
    # Expected counts of a large total, rounded to integers: the statistic is
    # zero up to the rounding error (at most 1/4 per cell over expected count).
    total = 10**8
    counts = {k: int(round(total * p)) for k, p in enumerate(stats.poisson.pmf(np.arange(40), 2.0))}
    emp = EmpiricalDistribution(counts, sum(counts.values()))
    v = chi_square_poisson(emp, 2.0)
    assert v.passed and v.statistic < 1e-2 and v.p_value > 0.999


def test_chi_square_not_applicable():
    v = chi_square_poisson(EmpiricalDistribution({0: 3}, 3), 0.1)
    assert v.passed is None and not v.applicable


def test_chi_square_detects_wrong_mean():
    rng = np.random.default_rng(2)
    emp = EmpiricalDistribution.from_values(rng.poisson(1.2, 20000))
    assert chi_square_poisson(emp, 1.0).passed is False


def test_chi_square_null_calibration():
    rng = np.random.default_rng(3)
    runs = 600
    rejections = sum(
        not chi_square_poisson(EmpiricalDistribution.from_values(rng.poisson(0.9, 2000)), 0.9).passed
        for _ in range(runs))
    lo, hi = rate_band(0.01, runs)
    assert lo <= rejections / runs <= hi


# --------------------------------------------------------------------- KS

def test_ks_uniform_points_fail():
    x = np.random.default_rng(4).random(10**4)
    v = ks_projected_marginal(x)
    assert v.passed is False and v.statistic == pytest.approx(0.25, abs=0.02)


def test_ks_not_applicable():
    assert ks_projected_marginal([]).passed is None
    assert ks_projected_marginal([0.5] * 9).passed is None


def test_ks_threshold_is_asymptotic_quantile():
    v = ks_projected_marginal(np.sqrt(np.random.default_rng(5).random(400)))
    assert v.threshold == pytest.approx(1.358 / 20, rel=1e-3)


def test_ks_null_calibration():
    rng = np.random.default_rng(6)
    runs = 600
    rejections = sum(not ks_projected_marginal(np.sqrt(rng.random(300))).passed for _ in range(runs))
    lo, hi = rate_band(0.05, runs)
    assert lo <= rejections / runs <= hi


def test_ks_sub_interval():
    # Density proportional to x on [0, 0.5]: inverse cdf 0.5 sqrt(u).
    x = 0.5 * np.sqrt(np.random.default_rng(7).random(2000))
    assert ks_projected_marginal(x, interval=(0.0, 0.5)).passed


# ------------------------------------------------------------------- void

def test_void_examples():
    box = BoxRegion.unit(1)
    v = void_probability_check([True] * 200, box, c=60.0)
    assert v.passed and v.threshold == pytest.approx(1.0, abs=1e-15)
    assert void_probability_check([True] * 100, box, c=0.0).threshold == pytest.approx(math.exp(-1))
    half = BoxRegion(((0.0, 0.5),))
    assert void_probability_check([False] * 100, half, c=0.0).threshold == pytest.approx(math.exp(-0.25))
    with pytest.raises(InvalidArgumentError):
        void_probability_check([True] * 99, box, 0.0)


def test_void_target_override():
    v = void_probability_check([True] * 70 + [False] * 30, BoxRegion.unit(1), 0.0, target=0.7)
    assert v.passed and v.threshold == 0.7


def test_void_null_calibration():
    rng = np.random.default_rng(8)
    box = BoxRegion(((0.0, 0.5),))
    target = math.exp(-0.25)
    runs = 600
    rejections = sum(not void_probability_check(rng.random(2000) < target, box, 0.0).passed
                     for _ in range(runs))
    lo, hi = rate_band(0.003, runs)
    assert lo <= rejections / runs <= hi


def test_wilson_interval():
    lo, hi = wilson_interval(50, 100, 0.95)
    assert lo == pytest.approx(0.4038, abs=1e-4) and hi == pytest.approx(0.5962, abs=1e-4)
    lo, hi = wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-15) and hi > 0


# ------------------------------------------------------- mean / variance

def test_mean_variance_constant():
    s = mean_variance_summary([3, 3, 3, 3])
    assert s.variance == 0 and s.se_mean == 0 and s.se_variance == 0


def test_mean_variance_needs_two_values():
    with pytest.raises(InvalidArgumentError):
        mean_variance_summary([1])


def test_jackknife_matches_brute_force():
    x = np.random.default_rng(9).poisson(2.0, 40).astype(float)
    s = mean_variance_summary(x)
    n = len(x)
    loo = np.array([np.delete(x, i) for i in range(n)])
    loo_mean, loo_var = loo.mean(axis=1), loo.var(axis=1, ddof=1)

    def jk(v):
        return math.sqrt((n - 1) / n * ((v - v.mean()) ** 2).sum())

    assert s.mean == pytest.approx(x.mean()) and s.variance == pytest.approx(x.var(ddof=1))
    assert s.se_mean == pytest.approx(jk(loo_mean), rel=1e-10)
    assert s.se_variance == pytest.approx(jk(loo_var), rel=1e-10)
    assert s.se_difference == pytest.approx(jk(loo_mean - loo_var), rel=1e-10)


def test_poisson_mean_equals_variance_within_4_sigma():
    rng = np.random.default_rng(10)
    for mu in (0.5, 1.0, 4.0):
        s = mean_variance_summary(rng.poisson(mu, 20000))
        assert abs(s.mean - mu) <= 4 * s.se_mean
        assert abs(s.variance - mu) <= 4 * s.se_variance
        assert abs(s.mean - s.variance) <= 4 * s.se_difference


def test_mean_variance_null_calibration():
    rng = np.random.default_rng(11)
    runs = 500
    rejections = 0
    for _ in range(runs):
        s = mean_variance_summary(rng.poisson(1.0, 2000))
        rejections += abs(s.mean - s.variance) > 3 * s.se_difference
    lo, hi = rate_band(0.0027, runs)
    assert lo <= rejections / runs <= hi


def test_verdicts_are_deterministic():
    x = np.sqrt(np.random.default_rng(12).random(100))
    assert ks_projected_marginal(x).to_dict() == ks_projected_marginal(x.copy()).to_dict()
