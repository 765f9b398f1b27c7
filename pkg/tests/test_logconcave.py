import math

import numpy as np
import pytest
from scipy import stats

from proxmh.errors import NotLogConcaveError
from proxmh.oracles.logconcave import LogConcaveEnvelope, locate_mode, sample_logconcave_1d
from proxmh.oracles.quadrature import Quadrature1DConfig, quadrature_1d


def test_standard_normal_ks(rng):
    ys = sample_logconcave_1d(lambda y: -0.5 * y * y, 0.0, rng, size=100_000)
    assert stats.kstest(ys, stats.norm.cdf).statistic <= 0.01


def test_l1_oracle_density_histogram(rng):
    eta = 0.25

    def log_dens(y):
        return -y * y / (4 * eta) - abs(y)

    ys = sample_logconcave_1d(log_dens, 0.0, rng, size=100_000)
    edges = np.linspace(-4, 4, 201)
    log_z = quadrature_1d(lambda y: -y * y / (4 * eta) - np.abs(y), Quadrature1DConfig(breakpoints=(0.0,)))[0]
    # exact cell masses by quadrature on each cell
    masses = np.array([math.exp(quadrature_1d(lambda y: -y * y / (4 * eta) - np.abs(y),
                                              Quadrature1DConfig(lower=a, upper=b))[0] - log_z)
                       for a, b in zip(edges[:-1], edges[1:])])
    counts, _ = np.histogram(ys, edges)
    tv = 0.5 * (np.abs(counts / ys.size - masses).sum() + (ys.size - counts.sum()) / ys.size)
    assert tv <= 0.02


def test_mode_far_from_hint(rng):
    def log_dens(y):
        return -0.5 * (y - 5.0) ** 2

    assert locate_mode(log_dens, 0.0) == pytest.approx(5.0, abs=1e-6)
    env = LogConcaveEnvelope.build(log_dens, 0.0)
    attempts = [env.sample(rng)[1] for _ in range(5000)]
    assert 1.0 / np.mean(attempts) >= 0.2


def test_mode_at_kink():
    assert locate_mode(lambda y: -abs(y - 1.5), -3.0) == pytest.approx(1.5, abs=1e-8)


def test_envelope_dominates_density():
    fn = lambda y: -y ** 4 - abs(y - 0.3)  # noqa: E731
    env = LogConcaveEnvelope.build(fn, 0.0)
    for y in np.linspace(-5, 5, 2001):
        assert env.log_envelope(y) >= fn(y) - 1e-12


def test_one_sided_support(rng):
    def log_dens(r):
        return -math.inf if r <= 0 else math.log(r) - r * r / 2

    ys = sample_logconcave_1d(log_dens, 1.0, rng, size=20_000)
    assert np.all(ys > 0)
    assert stats.kstest(ys, stats.rayleigh.cdf).statistic < 0.015


def test_unbounded_density_rejected():
    with pytest.raises(NotLogConcaveError):
        locate_mode(lambda y: y, 0.0)


def test_non_concave_detected(rng):
    # log-density convex on each side: tails heavier than any secant envelope
    with pytest.raises(NotLogConcaveError):
        sample_logconcave_1d(lambda y: -math.sqrt(abs(y)), 0.0, rng, size=2000)
