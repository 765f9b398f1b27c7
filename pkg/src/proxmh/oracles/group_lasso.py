"""Proximal sampling oracle for one group of the group lasso penalty.

Target density on ``R^k`` (``k`` = group size):

    p(y) ~ exp(-||y - u||^2 / (4 eta) - w ||y||)

Writing ``y = t * uhat + r * v`` with ``uhat = u/||u||``, ``v`` a unit vector
orthogonal to ``uhat`` and ``r >= 0``, the joint density of ``(t, r)`` is

    q(t, r) ~ r^(k-2) exp(-((t - ||u||)^2 + r^2) / (4 eta) - w sqrt(t^2 + r^2))

and ``v`` is uniform on the orthogonal unit sphere.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator
from scipy.special import gammaln, ive

from ..errors import OracleError
from .laplace import laplace_log_partition, laplace_sample
from .logconcave import sample_logconcave_1d
from .quadrature import Quadrature1DConfig, quadrature_1d

MAX_ATTEMPTS = 10**6
GRID_SIZE = 512


def _log_sphere_area(k):
    """log surface area of the unit sphere in R^k."""
    return math.log(2.0) + 0.5 * k * math.log(math.pi) - gammaln(0.5 * k)


def group_log_partition(u, eta: float, weight: float,
                        rel_tol: float = 1e-12) -> float:
    """``log int_{R^k} exp(-||y-u||^2/(4 eta) - w ||y||) dy``.

    The angular integral is done in closed form,
    ``int_0^pi e^{kappa cos th} sin^{k-2} th dth = sqrt(pi) Gamma((k-1)/2) (2/kappa)^nu I_nu(kappa)``
    with ``nu = k/2 - 1`` and ``kappa = rho ||u|| / (2 eta)``, leaving a radial
    quadrature in ``rho = ||y||``.
    """
    u = np.asarray(u, dtype=float)
    k = u.size
    if k == 1:
        return laplace_log_partition(u, eta, weight)
    b = float(np.linalg.norm(u))
    nu = 0.5 * k - 1.0
    s = math.sqrt(2.0 * eta)
    cfg = Quadrature1DConfig(rel_tol=rel_tol, lower=0.0, upper=None,
                             center=max(b - 2 * eta * weight, 0.0), scale=s * (1.0 + math.sqrt(k)))
    if b == 0.0:
        def radial(rho):
            with np.errstate(divide="ignore"):
                return (k - 1) * np.log(rho) - rho * rho / (4 * eta) - weight * rho

        log_int, _ = quadrature_1d(radial, cfg)
        return _log_sphere_area(k) + log_int

    log_scale = nu * math.log(4.0 * eta / b)

    def radial(rho):
        kappa = rho * b / (2.0 * eta)
        with np.errstate(divide="ignore"):
            return (0.5 * k * np.log(rho) + log_scale + np.log(ive(nu, kappa))
                    - (rho - b) ** 2 / (4 * eta) - weight * rho)

    log_int, _ = quadrature_1d(radial, cfg)
    return math.log(2.0) + 0.5 * k * math.log(math.pi) + log_int


def _uniform_direction(k, rng, orthogonal_to=None):
    xi = rng.standard_normal(k)
    if orthogonal_to is not None:
        xi = xi - (xi @ orthogonal_to) * orthogonal_to
    return xi / np.linalg.norm(xi)


def _sample_radial(k, eta, weight, rng):
    def log_dens(r):
        if r <= 0:
            return -math.inf
        return (k - 1) * math.log(r) - r * r / (4 * eta) - weight * r

    r = sample_logconcave_1d(log_dens, math.sqrt(2 * eta * max(k - 1, 1)), rng,
                             scale=math.sqrt(2 * eta))
    return r * _uniform_direction(k, rng)


def _sample_rejection(u, eta, weight, rng, max_attempts):
    """Proposal ``N(u - 2 eta w uhat, 2 eta I)``, accept w.p. ``exp(-w(||y|| - <uhat, y>))``.

    Valid because ``w||y|| >= w<uhat, y>`` and the proposal density is
    proportional to ``exp(-||y-u||^2/(4 eta) - w<uhat, y>)``.
    """
    b = float(np.linalg.norm(u))
    uhat = u / b
    mean = u - 2.0 * eta * weight * uhat
    s = math.sqrt(2.0 * eta)
    for _ in range(max_attempts):
        y = mean + s * rng.standard_normal(u.size)
        gap = float(np.linalg.norm(y)) - float(uhat @ y)
        if math.log(rng.random()) <= -weight * max(gap, 0.0):
            return y
    raise OracleError(f"group-lasso rejection sampler failed after {max_attempts} attempts",
                      attempts=max_attempts)


class GroupGridSampler:
    """Inverse-CDF sampler over the ``(t, r)`` plane on a fixed grid.

    The marginal CDF of ``t`` comes from trapezoid integration of ``q`` over the
    grid; the conditional CDF of ``r`` given ``t`` is rebuilt on the ``r`` grid at
    the drawn ``t``. Both CDFs are inverted with monotone cubic (PCHIP)
    interpolation.
    """

    def __init__(self, u, eta, weight, grid_size=GRID_SIZE):
        self.u = np.asarray(u, dtype=float)
        self.k = self.u.size
        if self.k < 2:
            raise ValueError("grid sampler needs a group of size >= 2")
        self.b = float(np.linalg.norm(self.u))
        if self.b == 0.0:
            raise ValueError("grid sampler needs a nonzero center")
        self.uhat = self.u / self.b
        self.eta, self.weight = eta, weight
        s = math.sqrt(2.0 * eta)
        c_t = max(self.b - 2 * eta * weight, 0.0)
        half = 12.0 * s + 2.0 * eta * weight
        self.t_grid = np.linspace(c_t - half, c_t + half, grid_size)
        self.r_grid = np.linspace(0.0, s * (12.0 + math.sqrt(self.k)), grid_size)
        logq = self.log_q(self.t_grid[:, None], self.r_grid[None, :])
        top = np.max(logq)
        dens = np.exp(logq - top)
        marg = trapezoid(dens, self.r_grid, axis=1)
        self.t_inverse = _inverse_cdf(self.t_grid, marg)

    def log_q(self, t, r):
        with np.errstate(divide="ignore"):
            return ((self.k - 2) * np.log(r) if self.k > 2 else 0.0) \
                - ((t - self.b) ** 2 + r * r) / (4 * self.eta) \
                - self.weight * np.sqrt(t * t + r * r)

    def sample(self, rng):
        t = float(self.t_inverse(rng.random()))
        logq = self.log_q(t, self.r_grid)
        r_inverse = _inverse_cdf(self.r_grid, np.exp(logq - np.max(logq)))
        r = float(r_inverse(rng.random()))
        v = _uniform_direction(self.k, rng, orthogonal_to=self.uhat)
        return t * self.uhat + r * v


def _inverse_cdf(grid, dens):
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    return PchipInterpolator(cdf[keep], grid[keep])


def group_lasso_oracle_sample(x_center, eta: float, weight: float, rng: np.random.Generator,
                              method: str = "rejection", grid_size: int = GRID_SIZE,
                              max_attempts: int = MAX_ATTEMPTS) -> np.ndarray:
    """One draw from ``exp(-||y - x_center||^2/(4 eta) - w ||y||)`` on ``R^k``.

    ``method="rejection"`` is exact; ``method="grid"`` inverts interpolated CDFs
    of the two-dimensional ``(t, r)`` law. Size-1 groups use the l1 closed form
    and a zero center uses radial sampling with a uniform direction.
    """
    u = np.asarray(x_center, dtype=float)
    k = u.size
    if k == 1:
        return laplace_sample(u, eta, weight, rng)
    if not np.any(u):
        return _sample_radial(k, eta, weight, rng)
    if method == "rejection":
        return _sample_rejection(u, eta, weight, rng, max_attempts)
    if method == "grid":
        return GroupGridSampler(u, eta, weight, grid_size).sample(rng)
    raise ValueError(f"unknown group-lasso sampling method {method!r}")
