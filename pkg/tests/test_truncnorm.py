import math

import numpy as np
import pytest
from scipy import stats

from proxmh.oracles.truncnorm import (TruncatedNormalParams, sample_truncated_normal,
                                      sample_truncated_normal_many, std_truncated_normal)


def draws(params, rng, n):
    return np.array([sample_truncated_normal(params, rng) for _ in range(n)])


def test_untruncated_reduces_to_normal(rng):
    xs = draws(TruncatedNormalParams(1.5, 4.0), rng, 100_000)
    assert abs(xs.mean() - 1.5) <= 3 * 2.0 / math.sqrt(xs.size)


def test_half_normal_mean(rng):
    xs = draws(TruncatedNormalParams(0.0, 1.0, 0.0), rng, 100_000)
    assert xs.min() >= 0.0
    assert abs(xs.mean() - math.sqrt(2 / math.pi)) <= 3 * xs.std() / math.sqrt(xs.size)


def test_far_tail_support(rng):
    xs = draws(TruncatedNormalParams(0.0, 1.0, 10.0), rng, 20_000)
    assert np.all(xs >= 10.0) and np.all(np.isfinite(xs))
    # mean of N(0,1) on [10, inf) is phi(10)/Q(10)
    ref = stats.truncnorm(10, np.inf).mean()
    assert abs(xs.mean() - ref) <= 4 * xs.std() / math.sqrt(xs.size)


@pytest.mark.parametrize("a,b", [(-1.0, 2.0), (4.0, 6.0), (5.5, 5.7), (-8.0, -6.0), (-np.inf, -7.0)])
def test_ks_against_scipy(a, b, rng):
    xs = np.array([std_truncated_normal(a, b, rng) for _ in range(20_000)])
    assert np.all((xs >= a) & (xs <= b))
    assert stats.kstest(xs, stats.truncnorm(a, b).cdf).statistic < 0.015


def test_log_mass_matches_scipy():
    cases = [(TruncatedNormalParams(0.3, 2.0, -1.0, 4.0),
              np.log(stats.norm.cdf(3.7 / np.sqrt(2)) - stats.norm.cdf(-1.3 / np.sqrt(2)))),
             (TruncatedNormalParams(0.0, 1.0, 30.0), stats.norm.logsf(30.0)),
             (TruncatedNormalParams(-2.0, 0.25, upper=-40.0), stats.norm.logcdf(-76.0))]
    for p, ref in cases:
        assert p.log_mass() == pytest.approx(ref, rel=1e-10)


def test_vectorized_matches_distribution(rng):
    mean = np.array([0.0, 3.0, -1.0])
    xs = np.array([sample_truncated_normal_many(mean, 1.0, [0.0, 9.0, -np.inf], [np.inf, np.inf, -8.0], rng)
                   for _ in range(5000)])
    assert np.all(xs[:, 0] >= 0) and np.all(xs[:, 1] >= 9) and np.all(xs[:, 2] <= -8)
    assert abs(xs[:, 0].mean() - math.sqrt(2 / math.pi)) < 0.05


def test_params_validation():
    with pytest.raises(ValueError):
        TruncatedNormalParams(0.0, 0.0)
    with pytest.raises(ValueError):
        TruncatedNormalParams(0.0, 1.0, 2.0, 1.0)
