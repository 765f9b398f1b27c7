"""Composite targets ``pi ~ exp(-f - g)``, chain state and sampler configuration.

``f`` is smooth (Lipschitz gradient), ``g`` is convex and Lipschitz and is
described structurally by a :class:`RegularizerSpec` variant so that the
oracles can exploit its form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .errors import DimensionError, NonFinitePotentialError, UnsupportedOperationError

Array = np.ndarray


# --------------------------------------------------------------------------
# Regularizer variants
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    """``g = 0``."""


@dataclass(frozen=True)
class ScaledL1:
    lam: float

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError(f"ScaledL1 needs lam > 0, got {self.lam}")


@dataclass(frozen=True)
class SeparableGeneric:
    """``g(x) = sum_i g_i(x_i)`` with convex one-dimensional ``g_i``.

    Each ``g_i`` must accept numpy arrays elementwise. ``subgrads`` and
    ``proxes`` are optional; without them a central difference and a
    golden-section search are used.
    """

    funcs: tuple
    lipschitz: tuple
    subgrads: Optional[tuple] = None
    proxes: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "funcs", tuple(self.funcs))
        object.__setattr__(self, "lipschitz", tuple(float(c) for c in self.lipschitz))
        if len(self.funcs) != len(self.lipschitz):
            raise ValueError("one Lipschitz bound per coordinate function is required")
        if any(c < 0 for c in self.lipschitz):
            raise ValueError("Lipschitz bounds must be nonnegative")
        for name in ("subgrads", "proxes"):
            val = getattr(self, name)
            if val is not None:
                val = tuple(val)
                if len(val) != len(self.funcs):
                    raise ValueError(f"{name} must have one entry per coordinate")
                object.__setattr__(self, name, val)


@dataclass(frozen=True)
class GroupLasso:
    """``g(x) = sum_j w_j ||x_{G_j}||_2`` over a partition ``G_1..G_J`` of the
    coordinates (0-based indices)."""

    groups: tuple
    weights: tuple = None

    def __post_init__(self):
        groups = tuple(tuple(int(i) for i in grp) for grp in self.groups)
        if not groups or any(len(grp) == 0 for grp in groups):
            raise ValueError("groups must be non-empty")
        weights = self.weights
        if weights is None:
            weights = (1.0,) * len(groups)
        weights = tuple(float(w) for w in weights)
        if len(weights) != len(groups):
            raise ValueError("one weight per group is required")
        if any(not w > 0 for w in weights):
            raise ValueError("group weights must be positive")
        flat = [i for grp in groups for i in grp]
        if len(set(flat)) != len(flat):
            raise ValueError("groups overlap")
        if sorted(flat) != list(range(len(flat))):
            raise ValueError("groups must partition {0, ..., d-1}")
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self):
        return sum(len(grp) for grp in self.groups)


@dataclass(frozen=True)
class Custom:
    """Caller-supplied ``g`` with optional subgradient, prox and sampling oracle.

    ``oracle`` must provide ``sample(u, eta, rng)`` and ``log_partition(u, eta)``.
    """

    g: Callable[[Array], float]
    lipschitz: float
    subgrad: Optional[Callable[[Array], Array]] = None
    prox: Optional[Callable[[Array, float], Array]] = None
    oracle: object = None


RegularizerSpec = Union[Zero, ScaledL1, SeparableGeneric, GroupLasso, Custom]


def regularizer_value(spec: RegularizerSpec, x: Array) -> float:
    if isinstance(spec, Zero):
        return 0.0
    if isinstance(spec, ScaledL1):
        return spec.lam * float(np.sum(np.abs(x)))
    if isinstance(spec, SeparableGeneric):
        return float(sum(float(gi(xi)) for gi, xi in zip(spec.funcs, x)))
    if isinstance(spec, GroupLasso):
        return float(sum(w * math.sqrt(float(np.dot(x[list(grp)], x[list(grp)])))
                         for grp, w in zip(spec.groups, spec.weights)))
    if isinstance(spec, Custom):
        return float(spec.g(x))
    raise TypeError(f"unknown regularizer {spec!r}")


def regularizer_lipschitz(spec: RegularizerSpec, dim: int) -> float:
    """Lipschitz constant of ``g`` w.r.t. the Euclidean norm.

    ScaledL1: ``lam * sqrt(d)``. GroupLasso: ``sqrt(sum w_j^2)``, which is
    ``sqrt(J) * max w`` for equal weights. Separable: ``sqrt(sum L_i^2)``.
    """
    if isinstance(spec, Zero):
        return 0.0
    if isinstance(spec, ScaledL1):
        return spec.lam * math.sqrt(dim)
    if isinstance(spec, SeparableGeneric):
        return math.sqrt(sum(c * c for c in spec.lipschitz))
    if isinstance(spec, GroupLasso):
        return math.sqrt(sum(w * w for w in spec.weights))
    if isinstance(spec, Custom):
        return float(spec.lipschitz)
    raise TypeError(f"unknown regularizer {spec!r}")


def _central_diff(fn, t, h=1e-7):
    h = h * max(1.0, abs(t))
    return (float(fn(t + h)) - float(fn(t - h))) / (2 * h)


def regularizer_subgrad(spec: RegularizerSpec, x: Array) -> Array:
    """One element of the subdifferential; the minimal-norm one at kinks."""
    if isinstance(spec, Zero):
        return np.zeros_like(x, dtype=float)
    if isinstance(spec, ScaledL1):
        return spec.lam * np.sign(x)
    if isinstance(spec, SeparableGeneric):
        if spec.subgrads is not None:
            return np.array([float(s(xi)) for s, xi in zip(spec.subgrads, x)])
        return np.array([_central_diff(gi, float(xi)) for gi, xi in zip(spec.funcs, x)])
    if isinstance(spec, GroupLasso):
        out = np.zeros_like(x, dtype=float)
        for grp, w in zip(spec.groups, spec.weights):
            idx = list(grp)
            nrm = float(np.linalg.norm(x[idx]))
            if nrm > 0:
                out[idx] = w * x[idx] / nrm
        return out
    if isinstance(spec, Custom):
        if spec.subgrad is None:
            raise UnsupportedOperationError("Custom regularizer has no subgradient oracle")
        return np.asarray(spec.subgrad(x), dtype=float)
    raise TypeError(f"unknown regularizer {spec!r}")


# --------------------------------------------------------------------------
# Target
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class CompositeTarget:
    """Density ``pi(x) ~ exp(-f(x) - g(x))`` on ``R^dim``.

    The regularity constants are supplied by the caller:
    ``smoothness_L`` bounds the Lipschitz constant of ``grad f``;
    ``(dissip_mu, dissip_beta, dissip_center)`` satisfy
    ``<grad f(x), x - x0> >= mu/2 ||x - x0||^2 - beta``; ``lipschitz_Md`` bounds
    the Lipschitz constant of ``g`` (derived from ``g_spec`` when omitted).
    """

    dim: int
    f_value: Callable[[Array], float]
    f_grad: Callable[[Array], Array]
    g_spec: RegularizerSpec = field(default_factory=Zero)
    smoothness_L: float = 0.0
    dissip_mu: float = 1.0
    dissip_beta: float = 0.0
    dissip_center: Optional[Array] = None
    lipschitz_Md: Optional[float] = None
    name: str = "target"

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim}")
        if self.smoothness_L < 0:
            raise ValueError("smoothness_L must be >= 0")
        if not self.dissip_mu > 0:
            raise ValueError("dissip_mu must be > 0")
        if self.dissip_beta < 0:
            raise ValueError("dissip_beta must be >= 0")
        center = self.dissip_center
        center = np.zeros(self.dim) if center is None else np.asarray(center, dtype=float).copy()
        if center.shape != (self.dim,):
            raise DimensionError(f"dissip_center has shape {center.shape}, expected ({self.dim},)")
        center.setflags(write=False)
        object.__setattr__(self, "dissip_center", center)
        if isinstance(self.g_spec, SeparableGeneric) and len(self.g_spec.funcs) != self.dim:
            raise DimensionError("SeparableGeneric needs one function per coordinate")
        if isinstance(self.g_spec, GroupLasso) and self.g_spec.dim != self.dim:
            raise DimensionError("GroupLasso groups do not partition the target dimension")
        md = self.lipschitz_Md
        if md is None:
            md = regularizer_lipschitz(self.g_spec, self.dim)
        if md < 0:
            raise ValueError("lipschitz_Md must be >= 0")
        object.__setattr__(self, "lipschitz_Md", float(md))

    def check_point(self, x) -> Array:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"expected a point of shape ({self.dim},), got {x.shape}")
        return x

    def g(self, x: Array) -> float:
        return regularizer_value(self.g_spec, x)


def eval_U(target: CompositeTarget, x) -> float:
    """Potential ``U(x) = f(x) + g(x)``."""
    x = target.check_point(x)
    fx = float(target.f_value(x))
    if not math.isfinite(fx):
        raise NonFinitePotentialError(f"f(x) = {fx} is not finite")
    return fx + target.g(x)


def subgrad_g(target: CompositeTarget, x) -> Array:
    x = target.check_point(x)
    return regularizer_subgrad(target.g_spec, x)


def grad_U(target: CompositeTarget, x) -> Array:
    x = target.check_point(x)
    return np.asarray(target.f_grad(x), dtype=float) + regularizer_subgrad(target.g_spec, x)


# --------------------------------------------------------------------------
# Chain state and configuration
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ChainState:
    """Iterate plus caches that are pure functions of ``(x, eta)``."""

    x: Array
    grad_fx: Array
    f_x: float
    u_x: float
    log_Z_shift: float
    step_index: int = 0


@dataclass(frozen=True)
class ExplicitPoint:
    point: Sequence[float]


@dataclass(frozen=True)
class GaussianAtCenter:
    """``X0 ~ N(center, I / (L + 1))``; ``center=None`` uses the dissipativity center."""

    center: Optional[Sequence[float]] = None


InitSpec = Union[ExplicitPoint, GaussianAtCenter]


@dataclass(frozen=True)
class SamplerConfig:
    eta: float
    n_steps: int
    seed: int = 0
    lazy: bool = False
    init: InitSpec = field(default_factory=GaussianAtCenter)

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ValueError(f"eta must be a positive finite number, got {self.eta}")
        if int(self.n_steps) != self.n_steps or self.n_steps < 1:
            raise ValueError(f"n_steps must be a positive integer, got {self.n_steps}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
