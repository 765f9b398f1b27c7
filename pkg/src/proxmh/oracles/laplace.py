"""Closed-form proximal sampling oracle for ``g(y) = lam * |y|`` per coordinate.

For the density ``exp(-(y - u)^2 / (4 eta) - lam |y|)`` completing the square on
each half-line gives

    y >= 0:  exp(eta lam^2 - lam u) * exp(-(y - (u - 2 eta lam))^2 / (4 eta))
    y <  0:  exp(eta lam^2 + lam u) * exp(-(y - (u + 2 eta lam))^2 / (4 eta))

so the normalizer is ``sqrt(4 pi eta) exp(eta lam^2) [e^{-lam u} Phi(m+/s) +
e^{lam u} Phi(-m-/s)]`` with ``m+- = u -+ 2 eta lam`` and ``s = sqrt(2 eta)``, and
a draw is a two-component mixture of half-line truncated normals.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.special import log_ndtr

from .truncnorm import TruncatedNormalParams, sample_truncated_normal_many, std_truncated_normal


def _log_branches(u, eta, lam):
    s = np.sqrt(2.0 * eta)
    m_plus = u - 2.0 * eta * lam
    m_minus = u + 2.0 * eta * lam
    log_plus = eta * lam * lam - lam * u + log_ndtr(m_plus / s)
    log_minus = eta * lam * lam + lam * u + log_ndtr(-m_minus / s)
    return log_plus, log_minus, m_plus, m_minus, s


def laplace_oracle_mixture(u_i: float, eta: float, lam: float):
    """Exact two-branch decomposition of the 1D l1 oracle density.

    Returns ``(weight_plus, weight_minus, tn_plus, tn_minus)`` where the plus
    branch lives on ``[0, inf)`` and the minus branch on ``(-inf, 0]``.
    """
    lp, lm, m_plus, m_minus, s = _log_branches(float(u_i), eta, lam)
    top = max(lp, lm)
    log_norm = top + math.log(math.exp(lp - top) + math.exp(lm - top))
    w_plus = math.exp(lp - log_norm)
    w_minus = math.exp(lm - log_norm)
    var = 2.0 * eta
    return (w_plus, w_minus,
            TruncatedNormalParams(m_plus, var, 0.0, math.inf),
            TruncatedNormalParams(m_minus, var, -math.inf, 0.0))


# below this size a plain Python loop beats numpy's per-call overhead
_SCALAR_MAX = 16


def _log_branches_scalar(ui, eta, lam):
    s = math.sqrt(2.0 * eta)
    m_plus = ui - 2.0 * eta * lam
    m_minus = ui + 2.0 * eta * lam
    base = eta * lam * lam
    lp = base - lam * ui + float(log_ndtr(m_plus / s))
    lm = base + lam * ui + float(log_ndtr(-m_minus / s))
    return lp, lm, m_plus, m_minus, s


def _logaddexp(a, b):
    top = a if a > b else b
    return top + math.log1p(math.exp(-abs(a - b)))


def laplace_log_partition(u, eta: float, lam: float) -> float:
    """``sum_i log int exp(-(y - u_i)^2/(4 eta) - lam |y|) dy``."""
    u = np.asarray(u, dtype=float)
    if u.size <= _SCALAR_MAX:
        total = 0.0
        for ui in u.tolist():
            lp, lm, *_ = _log_branches_scalar(ui, eta, lam)
            total += _logaddexp(lp, lm)
        return 0.5 * u.size * math.log(4.0 * math.pi * eta) + total
    lp, lm, *_ = _log_branches(u, eta, lam)
    per_coord = 0.5 * math.log(4.0 * math.pi * eta) + np.logaddexp(lp, lm)
    return float(np.sum(per_coord))


def laplace_sample(u, eta: float, lam: float, rng: np.random.Generator) -> np.ndarray:
    """One draw per coordinate: branch choice (one uniform each) then the truncated normal."""
    u = np.asarray(u, dtype=float)
    if u.size <= _SCALAR_MAX:
        return _laplace_sample_scalar(u, eta, lam, rng)
    lp, lm, m_plus, m_minus, s = _log_branches(u, eta, lam)
    # P(plus) = 1 / (1 + exp(lm - lp))
    p_plus = np.exp(-np.logaddexp(0.0, lm - lp))
    plus = rng.random(u.shape) < p_plus
    mean = np.where(plus, m_plus, m_minus)
    lower = np.where(plus, 0.0, -np.inf)
    upper = np.where(plus, np.inf, 0.0)
    return sample_truncated_normal_many(mean, s, lower, upper, rng)


def _laplace_sample_scalar(u, eta, lam, rng):
    """Branch uniforms for all coordinates first, then each truncated normal in
    coordinate order."""
    branches = [_log_branches_scalar(ui, eta, lam) for ui in u.tolist()]
    coins = rng.random(u.shape).tolist()
    out = np.empty(u.shape)
    for i, ((lp, lm, m_plus, m_minus, s), c) in enumerate(zip(branches, coins)):
        p_plus = 1.0 / (1.0 + math.exp(lm - lp)) if lm - lp < 700 else 0.0
        if c < p_plus:
            out[i] = m_plus + s * std_truncated_normal(-m_plus / s, math.inf, rng)
        else:
            out[i] = m_minus + s * std_truncated_normal(-math.inf, -m_minus / s, rng)
    return out
