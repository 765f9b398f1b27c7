"""Proximal sampling oracles.

An oracle, queried at a center ``u`` with step size ``eta``, draws

    Y ~ exp(-||y - u||^2 / (4 eta) - g(y)) / Z(u)

and evaluates ``log Z(u)``. Oracles are immutable; randomness comes only from
the generator passed to :meth:`ProxOracle.sample`.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import Custom, GroupLasso, ScaledL1, SeparableGeneric, Zero, regularizer_lipschitz
from ..errors import DimensionError, UnsupportedOperationError
from .group_lasso import group_lasso_oracle_sample, group_log_partition
from .laplace import laplace_log_partition, laplace_sample
from .logconcave import LogConcaveEnvelope
from .prox import prox_map
from .quadrature import Quadrature1DConfig, quadrature_1d


class ProxOracle:
    """Interface shared by all oracles."""

    regularizer = None

    def sample(self, u: np.ndarray, eta: float, rng: np.random.Generator) -> np.ndarray:
        raise NotImplementedError

    def log_partition(self, u: np.ndarray, eta: float) -> float:
        raise NotImplementedError

    def sample_many(self, u: np.ndarray, eta: float, rng: np.random.Generator, n: int) -> np.ndarray:
        """``n`` independent draws at the same center, shape ``(n, d)``."""
        return np.array([self.sample(u, eta, rng) for _ in range(n)])

    def prox(self, u, eta):
        return prox_map(self.regularizer, u, eta)


class ZeroOracle(ProxOracle):
    def __init__(self):
        self.regularizer = Zero()

    def sample(self, u, eta, rng):
        return u + math.sqrt(2.0 * eta) * rng.standard_normal(u.shape)

    def sample_many(self, u, eta, rng, n):
        return u + math.sqrt(2.0 * eta) * rng.standard_normal((n, u.size))

    def log_partition(self, u, eta):
        return 0.5 * u.size * math.log(4.0 * math.pi * eta)


class L1Oracle(ProxOracle):
    """Closed form for ``g = lam * ||y||_1``."""

    def __init__(self, spec: ScaledL1):
        self.regularizer = spec

    def sample(self, u, eta, rng):
        return laplace_sample(u, eta, self.regularizer.lam, rng)

    def sample_many(self, u, eta, rng, n):
        return laplace_sample(np.broadcast_to(u, (n, u.size)), eta, self.regularizer.lam, rng)

    def log_partition(self, u, eta):
        return laplace_log_partition(u, eta, self.regularizer.lam)


class SeparableOracle(ProxOracle):
    """Generic coordinate-separable ``g``: adaptive quadrature for each ``Z_i``,
    log-concave rejection sampling for each coordinate.

    The quadrature window for coordinate ``i`` is
    ``c_i +- (12 sqrt(2 eta) + 2 eta L_i)`` around the mode ``c_i`` of the
    coordinate density.
    """

    def __init__(self, spec: SeparableGeneric, rel_tol: float = 1e-12):
        self.regularizer = spec
        self.rel_tol = rel_tol

    def _coordinate(self, i, ui, eta):
        gi = self.regularizer.funcs[i]

        def log_dens(y):
            return -(y - ui) ** 2 / (4.0 * eta) - gi(y)

        return log_dens

    def _mode(self, i, ui, eta):
        # the mode of the coordinate density is the prox point with step 2 eta
        spec = self.regularizer
        one = SeparableGeneric((spec.funcs[i],), (spec.lipschitz[i],),
                               proxes=None if spec.proxes is None else (spec.proxes[i],))
        return float(prox_map(one, np.array([ui]), 2.0 * eta)[0])

    def coordinate_log_partition(self, i, ui, eta):
        c = self._mode(i, ui, eta)
        half = 12.0 * math.sqrt(2.0 * eta) + 2.0 * eta * self.regularizer.lipschitz[i]
        cfg = Quadrature1DConfig(rel_tol=self.rel_tol, lower=c - half, upper=c + half)
        return quadrature_1d(self._coordinate(i, ui, eta), cfg)[0]

    def log_partition(self, u, eta):
        return float(sum(self.coordinate_log_partition(i, float(ui), eta) for i, ui in enumerate(u)))

    def _envelope(self, i, ui, eta):
        ld = self._coordinate(i, ui, eta)
        return LogConcaveEnvelope.build(lambda y: float(ld(y)), self._mode(i, ui, eta),
                                        scale=math.sqrt(2.0 * eta))

    def sample(self, u, eta, rng):
        return np.array([self._envelope(i, float(ui), eta).sample(rng)[0] for i, ui in enumerate(u)])

    def sample_many(self, u, eta, rng, n):
        # one envelope per coordinate, reused for all n draws (column by column)
        out = np.empty((n, u.size))
        for i, ui in enumerate(u):
            env = self._envelope(i, float(ui), eta)
            out[:, i] = [env.sample(rng)[0] for _ in range(n)]
        return out


class GroupLassoOracle(ProxOracle):
    """Product over groups of the single-group oracle."""

    def __init__(self, spec: GroupLasso, method: str = "rejection", grid_size: int = 512):
        self.regularizer = spec
        self.method = method
        self.grid_size = grid_size
        self._index = [np.array(grp) for grp in spec.groups]

    def sample(self, u, eta, rng):
        out = np.empty(u.shape)
        for idx, w in zip(self._index, self.regularizer.weights):
            out[idx] = group_lasso_oracle_sample(u[idx], eta, w, rng, self.method, self.grid_size)
        return out

    def log_partition(self, u, eta):
        return float(sum(group_log_partition(u[idx], eta, w)
                         for idx, w in zip(self._index, self.regularizer.weights)))


class CustomOracle(ProxOracle):
    def __init__(self, spec: Custom):
        if spec.oracle is None:
            raise UnsupportedOperationError("Custom regularizer was given without a sampling oracle")
        self.regularizer = spec
        self.inner = spec.oracle

    def sample(self, u, eta, rng):
        return np.asarray(self.inner.sample(u, eta, rng), dtype=float)

    def log_partition(self, u, eta):
        return float(self.inner.log_partition(u, eta))


def make_oracle(g_spec, **options) -> ProxOracle:
    """Oracle matching a :data:`~proxmh.core.RegularizerSpec` variant."""
    if isinstance(g_spec, Zero):
        return ZeroOracle()
    if isinstance(g_spec, ScaledL1):
        return L1Oracle(g_spec)
    if isinstance(g_spec, SeparableGeneric):
        return SeparableOracle(g_spec, **options)
    if isinstance(g_spec, GroupLasso):
        return GroupLassoOracle(g_spec, **options)
    if isinstance(g_spec, Custom):
        return CustomOracle(g_spec)
    raise TypeError(f"unknown regularizer {g_spec!r}")


def _check(u, eta):
    u = np.asarray(u, dtype=float)
    if u.ndim != 1:
        raise DimensionError(f"oracle center must be a vector, got shape {u.shape}")
    if not eta > 0:
        raise ValueError(f"eta must be positive, got {eta}")
    return u


def sample_prox(oracle: ProxOracle, u, eta: float, rng: np.random.Generator) -> np.ndarray:
    """One exact draw from ``exp(-||y - u||^2/(4 eta) - g(y))`` (normalized)."""
    return oracle.sample(_check(u, eta), eta, rng)


def log_partition(oracle: ProxOracle, u, eta: float) -> float:
    """``log int exp(-||y - u||^2/(4 eta) - g(y)) dy``."""
    return oracle.log_partition(_check(u, eta), eta)


def oracle_lipschitz(oracle: ProxOracle, dim: int) -> float:
    return regularizer_lipschitz(oracle.regularizer, dim)
