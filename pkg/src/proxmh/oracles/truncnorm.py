"""Exact truncated normal sampling.

Inverse-CDF when the nearer truncation boundary is within ``TAIL_SWITCH``
standard deviations of the mean; exponential-envelope rejection (Robert, 1995)
restricted to the truncation interval when the whole interval lies in a far
tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from ..errors import OracleError

TAIL_SWITCH = 5.0
_SQRT2 = math.sqrt(2.0)
MAX_ATTEMPTS = 10**6


@dataclass(frozen=True)
class TruncatedNormalParams:
    mean: float
    variance: float
    lower: float = -math.inf
    upper: float = math.inf

    def __post_init__(self):
        if not self.variance > 0:
            raise ValueError(f"variance must be positive, got {self.variance}")
        if not self.lower < self.upper:
            raise ValueError(f"need lower < upper, got [{self.lower}, {self.upper}]")

    @property
    def std(self):
        return math.sqrt(self.variance)

    def standardized(self):
        s = self.std
        return (self.lower - self.mean) / s, (self.upper - self.mean) / s

    def log_mass(self):
        """``log P(lower <= N(mean, variance) <= upper)``."""
        a, b = self.standardized()
        return _log_std_mass(a, b)


def _log_std_mass(a, b):
    if a > 0:
        # upper tail: P = Phi(-a) - Phi(-b)
        la, lb = log_ndtr(-a), log_ndtr(-b)
    else:
        la, lb = log_ndtr(b), log_ndtr(a)
    if lb == -np.inf:
        return float(la)
    return float(la + math.log1p(-math.exp(lb - la)))


def _std_inverse_cdf(a, b, u):
    """Inverse CDF of N(0,1) truncated to [a, b]; works in the tail nearer the interval."""
    if a > 0:
        # mirror to the lower tail for precision: X = -Y, Y in [-b, -a]
        return -_std_inverse_cdf(-b, -a, 1.0 - u)
    pa = 0.5 * math.erfc(-a / _SQRT2)
    pb = 0.5 * math.erfc(-b / _SQRT2)
    p = pa + u * (pb - pa)
    x = float(ndtri(p))
    return min(max(x, a), b)


def _std_tail_rejection(a, b, rng, max_attempts):
    """N(0,1) on [a, b] with a > 0 far in the tail.

    Proposal: exponential with Robert's optimal rate, truncated to [a, b] and
    drawn by inversion; accept with probability exp(-(z - rate)^2 / 2).
    """
    rate = 0.5 * (a + math.sqrt(a * a + 4.0))
    width = b - a
    # mass of the truncated exponential on [0, width]
    tail = -math.expm1(-rate * width) if math.isfinite(width) else 1.0
    for attempt in range(1, max_attempts + 1):
        e = -math.log1p(-rng.random() * tail) / rate
        z = a + e
        if math.log(rng.random()) <= -0.5 * (z - rate) ** 2:
            return min(z, b)
    raise OracleError(f"truncated-normal tail rejection failed after {max_attempts} attempts",
                      attempts=max_attempts)


def std_truncated_normal(a: float, b: float, rng: np.random.Generator,
                         max_attempts: int = MAX_ATTEMPTS) -> float:
    """One draw from ``N(0, 1)`` restricted to ``[a, b]``."""
    if a > TAIL_SWITCH:
        return _std_tail_rejection(a, b, rng, max_attempts)
    if b < -TAIL_SWITCH:
        return -_std_tail_rejection(-b, -a, rng, max_attempts)
    return _std_inverse_cdf(a, b, rng.random())


def sample_truncated_normal(params: TruncatedNormalParams, rng: np.random.Generator,
                            max_attempts: int = MAX_ATTEMPTS) -> float:
    """One exact draw from ``N(mean, variance)`` restricted to ``[lower, upper]``."""
    a, b = params.standardized()
    if a > TAIL_SWITCH:
        z = _std_tail_rejection(a, b, rng, max_attempts)
    elif b < -TAIL_SWITCH:
        z = -_std_tail_rejection(-b, -a, rng, max_attempts)
    else:
        z = _std_inverse_cdf(a, b, rng.random())
    return params.mean + params.std * z


def sample_truncated_normal_many(mean, std, lower, upper, rng, max_attempts=MAX_ATTEMPTS):
    """Vectorized draw, one per element of the broadcast parameter arrays.

    Elements are drawn in index order with the same rule as
    :func:`sample_truncated_normal`; inverse-CDF elements share one batched
    uniform draw.
    """
    mean, std, lower, upper = np.broadcast_arrays(
        np.asarray(mean, float), np.asarray(std, float),
        np.asarray(lower, float), np.asarray(upper, float))
    a = (lower - mean) / std
    b = (upper - mean) / std
    out = np.empty(a.shape)
    tail_hi = a > TAIL_SWITCH
    tail_lo = b < -TAIL_SWITCH
    body = ~(tail_hi | tail_lo)
    if body.any():
        ab, bb = a[body], b[body]
        u = rng.random(ab.shape)
        flip = ab > 0
        lo = np.where(flip, -bb, ab)
        hi = np.where(flip, -ab, bb)
        uu = np.where(flip, 1.0 - u, u)
        pa, pb = ndtr(lo), ndtr(hi)
        z = np.clip(ndtri(pa + uu * (pb - pa)), lo, hi)
        out[body] = np.where(flip, -z, z)
    for i in np.flatnonzero(tail_hi | tail_lo):
        if tail_hi.flat[i]:
            out.flat[i] = _std_tail_rejection(a.flat[i], b.flat[i], rng, max_attempts)
        else:
            out.flat[i] = -_std_tail_rejection(-b.flat[i], -a.flat[i], rng, max_attempts)
    return mean + std * out
