"""Metropolis-adjusted proximal chain, Langevin baselines and step-size tuning."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import (ChainState, CompositeTarget, ExplicitPoint, GaussianAtCenter, SamplerConfig,
                   Zero, regularizer_value, subgrad_g)
from .errors import OracleError, ProxMHError, QuadratureError, SamplerError
from .oracles import ProxOracle, ZeroOracle
from .oracles.prox import moreau_envelope
from .rng import ChainStreams, chain_streams

ALGORITHMS = ("prox_mh", "mala", "ula")


@dataclass(frozen=True)
class StepOutcome:
    next: ChainState
    proposed: np.ndarray
    accepted: bool
    log_accept_prob: float
    was_lazy_hold: bool = False


@dataclass(frozen=True)
class TuningReport:
    radius_R: float
    recommended_eta: float
    warmness_log_M0: float
    tail_radius_Rs: float
    grad_norm_A0: float
    constant_C: float = 1.0

    def as_dict(self):
        return {k: float(v) for k, v in self.__dict__.items()}


# --------------------------------------------------------------------------
# State and densities
# --------------------------------------------------------------------------


def make_state(target: CompositeTarget, oracle: ProxOracle, x, eta: float,
               step_index: int = 0) -> ChainState:
    """Chain state at ``x`` with its caches ``grad f(x)``, ``f(x)``, ``U(x)`` and
    ``log Z(x - eta grad f(x))``."""
    x = target.check_point(x)
    fx = float(target.f_value(x))
    grad = np.asarray(target.f_grad(x), dtype=float)
    u_x = fx + regularizer_value(target.g_spec, x)
    log_z = oracle.log_partition(x - eta * grad, eta)
    return ChainState(x=x, grad_fx=grad, f_x=fx, u_x=u_x, log_Z_shift=log_z, step_index=step_index)


def proposal_log_density(target: CompositeTarget, oracle: ProxOracle, x, y, eta: float) -> float:
    """``log p(x, y) = -||y - (x - eta grad f(x))||^2/(4 eta) - g(y) - log Z(x - eta grad f(x))``."""
    x = target.check_point(x)
    y = target.check_point(y)
    center = x - eta * np.asarray(target.f_grad(x), dtype=float)
    diff = y - center
    return (-float(diff @ diff) / (4.0 * eta) - regularizer_value(target.g_spec, y)
            - oracle.log_partition(center, eta))


def _log_ratio(state: ChainState, prop: ChainState, eta: float) -> float:
    # g(x) and g(z) cancel between the target and the proposal densities
    fwd = prop.x - state.x + eta * state.grad_fx
    bwd = state.x - prop.x + eta * prop.grad_fx
    val = (state.log_Z_shift - prop.log_Z_shift + state.f_x - prop.f_x
           - float(bwd @ bwd) / (4.0 * eta) + float(fwd @ fwd) / (4.0 * eta))
    if math.isnan(val):
        return -math.inf
    return min(0.0, val)


def log_accept_ratio(target: CompositeTarget, oracle: ProxOracle, x, z, eta: float) -> float:
    """Log Metropolis acceptance probability for moving from ``x`` to ``z``.

    ``x`` may be a :class:`ChainState` (its caches are reused) or a point.
    """
    state = x if isinstance(x, ChainState) else make_state(target, oracle, x, eta)
    prop = make_state(target, oracle, z, eta)
    return _log_ratio(state, prop, eta)


# --------------------------------------------------------------------------
# Transition kernels
# --------------------------------------------------------------------------


def _advance(state: ChainState, index: int) -> ChainState:
    return ChainState(state.x, state.grad_fx, state.f_x, state.u_x, state.log_Z_shift, index)


def _hold(state: ChainState) -> StepOutcome:
    return StepOutcome(_advance(state, state.step_index + 1), state.x, False, 0.0, True)


def _metropolis(state, prop, proposed, log_alpha, rng):
    # compare in log space; the uniform is always drawn so streams stay aligned
    v = rng.random()
    accepted = log_alpha >= 0.0 or (v > 0.0 and math.log(v) < log_alpha)
    nxt = _advance(prop if accepted else state, state.step_index + 1)
    return StepOutcome(nxt, proposed, accepted, log_alpha, False)


def step(target: CompositeTarget, oracle: ProxOracle, state: ChainState, config: SamplerConfig,
         rng: np.random.Generator) -> StepOutcome:
    """One transition of the Metropolis-adjusted proximal chain.

    Random draws, in order: the lazy coin (only when ``config.lazy``), the oracle
    draw at ``x - eta grad f(x)``, and one uniform for the accept test.
    """
    eta = config.eta
    if config.lazy and rng.random() < 0.5:
        return _hold(state)
    try:
        z = oracle.sample(state.x - eta * state.grad_fx, eta, rng)
        prop = make_state(target, oracle, z, eta)
    except (OracleError, QuadratureError) as exc:
        raise SamplerError(f"step {state.step_index}: {exc}", step=state.step_index) from exc
    return _metropolis(state, prop, z, _log_ratio(state, prop, eta), rng)


def _require_smooth(target, name):
    if not isinstance(target.g_spec, Zero):
        raise ProxMHError(f"{name} needs a smooth target (g = 0); fold g in with smoothed_target()")


def mala_step(target: CompositeTarget, state: ChainState, eta: float, rng: np.random.Generator,
              lazy: bool = False) -> StepOutcome:
    """Classical MALA: Gaussian proposal ``N(x - eta grad U(x), 2 eta I)`` plus Metropolis filter.

    Uses the same draw order as :func:`step`, so with ``g = 0`` both produce the
    same trajectory from the same stream.
    """
    _require_smooth(target, "MALA")
    if lazy and rng.random() < 0.5:
        return _hold(state)
    x = state.x
    z = (x - eta * state.grad_fx) + math.sqrt(2.0 * eta) * rng.standard_normal(x.shape)
    fz = float(target.f_value(z))
    gz = np.asarray(target.f_grad(z), dtype=float)
    prop = ChainState(z, gz, fz, fz, state.log_Z_shift, state.step_index)
    log_q_fwd = -float(np.sum((z - x + eta * state.grad_fx) ** 2)) / (4.0 * eta)
    log_q_bwd = -float(np.sum((x - z + eta * gz) ** 2)) / (4.0 * eta)
    val = (-fz + log_q_bwd) - (-state.f_x + log_q_fwd)
    log_alpha = -math.inf if math.isnan(val) else min(0.0, val)
    return _metropolis(state, prop, z, log_alpha, rng)


def ula_step(target: CompositeTarget, state: ChainState, eta: float, rng: np.random.Generator,
             lazy: bool = False) -> StepOutcome:
    """Unadjusted Langevin (Euler-Maruyama) step; every proposal is kept."""
    _require_smooth(target, "ULA")
    if lazy and rng.random() < 0.5:
        return _hold(state)
    x = state.x
    z = (x - eta * state.grad_fx) + math.sqrt(2.0 * eta) * rng.standard_normal(x.shape)
    fz = float(target.f_value(z))
    nxt = ChainState(z, np.asarray(target.f_grad(z), dtype=float), fz, fz, state.log_Z_shift,
                     state.step_index + 1)
    return StepOutcome(nxt, z, True, 0.0, False)


def smoothed_target(target: CompositeTarget, smoothing: float) -> CompositeTarget:
    """Smooth surrogate ``f + g^smoothing`` using the Moreau envelope of ``g``.

    ``grad g^s = (x - prox_{s g}(x)) / s`` is ``1/s``-Lipschitz, so the smoothness
    constant grows by ``1/s``. Dissipativity is kept with ``mu/2`` and
    ``beta + M_d^2 / mu`` because the envelope gradient is bounded by ``M_d``.
    """
    if isinstance(target.g_spec, Zero):
        return target
    spec = target.g_spec

    def f_value(x):
        return float(target.f_value(x)) + moreau_envelope(spec, x, smoothing)[0]

    def f_grad(x):
        return np.asarray(target.f_grad(x), dtype=float) + moreau_envelope(spec, x, smoothing)[1]

    md = target.lipschitz_Md
    return CompositeTarget(
        dim=target.dim, f_value=f_value, f_grad=f_grad, g_spec=Zero(),
        smoothness_L=target.smoothness_L + 1.0 / smoothing,
        dissip_mu=target.dissip_mu / 2.0,
        dissip_beta=target.dissip_beta + md * md / target.dissip_mu,
        dissip_center=target.dissip_center, lipschitz_Md=0.0,
        name=f"{target.name}+moreau({smoothing:g})")


# --------------------------------------------------------------------------
# Chains
# --------------------------------------------------------------------------


@dataclass
class ChainResult:
    """All iterates (``n_steps + 1`` rows, the initial point first) and per-step records."""

    samples: np.ndarray
    accepted: np.ndarray
    log_accept: np.ndarray
    lazy_holds: np.ndarray

    @property
    def acceptance_rate(self) -> float:
        active = ~self.lazy_holds
        n = int(active.sum())
        return float(self.accepted[active].sum()) / n if n else float("nan")


def initial_point(target: CompositeTarget, init, rng: np.random.Generator) -> np.ndarray:
    """``ExplicitPoint`` as given, or ``N(center, I/(L+1))`` for ``GaussianAtCenter``."""
    if isinstance(init, ExplicitPoint):
        return target.check_point(np.array(init.point, dtype=float))
    if isinstance(init, GaussianAtCenter):
        center = target.dissip_center if init.center is None else target.check_point(init.center)
        return center + rng.standard_normal(target.dim) / math.sqrt(target.smoothness_L + 1.0)
    raise TypeError(f"unknown init spec {init!r}")


def make_kernel(target, oracle, config, algorithm="prox_mh"):
    """``(initial_state_fn, transition_fn)`` for one of :data:`ALGORITHMS`."""
    eta = config.eta
    if algorithm == "prox_mh":
        return (lambda x: make_state(target, oracle, x, eta),
                lambda s, rng: step(target, oracle, s, config, rng))
    _require_smooth(target, algorithm)
    gauss = ZeroOracle()
    start = lambda x: make_state(target, gauss, x, eta)  # noqa: E731
    if algorithm == "mala":
        return start, lambda s, rng: mala_step(target, s, eta, rng, config.lazy)
    if algorithm == "ula":
        return start, lambda s, rng: ula_step(target, s, eta, rng, config.lazy)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def run_chain(target: CompositeTarget, oracle: Optional[ProxOracle], config: SamplerConfig,
              algorithm: str = "prox_mh", streams: Optional[ChainStreams] = None) -> ChainResult:
    """Run ``config.n_steps`` transitions from the configured initial point.

    ``streams`` defaults to chain 0 of ``config.seed``.
    """
    if streams is None:
        streams = chain_streams(config.seed, 1)[0]
    start, transition = make_kernel(target, oracle, config, algorithm)
    state = start(initial_point(target, config.init, streams.init))
    n = config.n_steps
    samples = np.empty((n + 1, target.dim))
    accepted = np.zeros(n, dtype=bool)
    log_acc = np.zeros(n)
    holds = np.zeros(n, dtype=bool)
    samples[0] = state.x
    rng = streams.transition
    for t in range(n):
        out = transition(state, rng)
        state = out.next
        samples[t + 1] = state.x
        accepted[t] = out.accepted
        log_acc[t] = out.log_accept_prob
        holds[t] = out.was_lazy_hold
    return ChainResult(samples, accepted, log_acc, holds)


def run_chains(target, oracle, config: SamplerConfig, n_chains: int, algorithm: str = "prox_mh",
               threads: int = 1) -> list:
    """Independent chains, chain ``i`` on the ``i``-th child stream of ``config.seed``.

    Results are ordered by chain index whatever the thread count.
    """
    streams = chain_streams(config.seed, n_chains)
    if threads <= 1 or n_chains == 1:
        return [run_chain(target, oracle, config, algorithm, s) for s in streams]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda s: run_chain(target, oracle, config, algorithm, s), streams))


# --------------------------------------------------------------------------
# Tuning
# --------------------------------------------------------------------------


def mixing_radius(L, mu, beta, Md, A0, d, epsilon, C=1.0):
    """``R = (C / sqrt(mu)) sqrt((L + 1/mu) A0^2 + Md^2 + beta + d log(4(L+1)/mu) + log(1/eps))``."""
    inner = ((L + 1.0 / mu) * A0 ** 2 + Md ** 2 + beta
             + d * math.log(4.0 * (L + 1.0) / mu) + math.log(1.0 / epsilon))
    return C / math.sqrt(mu) * math.sqrt(max(inner, 0.0))


def recommended_step_size(L, R, d):
    """``1 / (2 L^2 R^2 + L d)``; infinite when ``L = 0``."""
    denom = 2.0 * L * L * R * R + L * d
    return math.inf if denom == 0 else 1.0 / denom


def warmness_log_bound(L, mu, beta, Md, A0, d):
    """``log M0 <= (d/2) log(4(L+1)/mu) + (L + 1/mu) A0^2 + Md^2/4 + beta``."""
    return 0.5 * d * math.log(4.0 * (L + 1.0) / mu) + (L + 1.0 / mu) * A0 ** 2 + Md ** 2 / 4.0 + beta


def tail_radius(mu, beta, Md, d, s, C=1.0):
    """``R_s = C sqrt((beta + d + Md^2 + log(1/s)) / mu)``; the ball ``B(x0, R_s)``
    carries target mass at least ``1 - s`` for a suitable universal ``C``."""
    return C * math.sqrt((beta + d + Md ** 2 + math.log(1.0 / s)) / mu)


def tune(target: CompositeTarget, x0=None, epsilon: float = 0.1, s: float = 1e-10,
         C: float = 1.0, C_tail: float = 1.0) -> TuningReport:
    """Step size and diagnostic radii from the target's regularity constants.

    The universal constants are unknown, so ``recommended_eta`` is a heuristic
    scale rather than a certified bound.
    """
    if not 0 < epsilon < 1 + 1e-12 or not 0 < s < 1:
        raise ValueError("epsilon and s must lie in (0, 1)")
    x0 = target.dissip_center if x0 is None else target.check_point(x0)
    A0 = float(np.linalg.norm(np.asarray(target.f_grad(x0), dtype=float) + subgrad_g(target, x0)))
    L, mu, beta, Md, d = (target.smoothness_L, target.dissip_mu, target.dissip_beta,
                          target.lipschitz_Md, target.dim)
    R = mixing_radius(L, mu, beta, Md, A0, d, epsilon, C)
    return TuningReport(
        radius_R=R,
        recommended_eta=recommended_step_size(L, R, d),
        warmness_log_M0=warmness_log_bound(L, mu, beta, Md, A0, d),
        tail_radius_Rs=tail_radius(mu, beta, Md, d, s, C_tail),
        grad_norm_A0=A0,
        constant_C=C,
    )


def auto_step_size(target: CompositeTarget, x0=None, epsilon: float = 0.1) -> float:
    """``tune().recommended_eta`` clipped to ``[1e-8, 1/(16(L+1))]``."""
    eta = tune(target, x0, epsilon).recommended_eta
    return min(max(eta, 1e-8), 1.0 / (16.0 * (target.smoothness_L + 1.0)))
