"""Ground truth on grids, distances to it, effective sample size, lemma checks
and the many-chain mixing estimator."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.special import logsumexp

from .core import CompositeTarget, SamplerConfig, eval_U
from .errors import DegenerateSeriesError, DimensionError, RangeCoverageError
from .rng import chain_streams
from .sampler import (initial_point, log_accept_ratio, make_kernel, proposal_log_density,
                      tail_radius)

DEFAULT_BINS = 200


class OffGridWarning(UserWarning):
    pass


# --------------------------------------------------------------------------
# Ground truth
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundTruthGrid:
    """Unnormalized log-density at cell centers of a regular 1D or 2D grid.

    ``normalizer`` is the log of the midpoint-rule integral over the grid, so
    ``exp(log_density - normalizer) * cell_volume`` sums to one.
    """

    ranges: tuple
    bins: tuple
    log_density: np.ndarray
    normalizer: float

    @property
    def dims(self) -> int:
        return len(self.bins)

    @property
    def edges(self):
        return [np.linspace(lo, hi, n + 1) for (lo, hi), n in zip(self.ranges, self.bins)]

    @property
    def centers(self):
        return [0.5 * (e[1:] + e[:-1]) for e in self.edges]

    @property
    def cell_volume(self) -> float:
        return float(np.prod([(hi - lo) / n for (lo, hi), n in zip(self.ranges, self.bins)]))

    @property
    def masses(self) -> np.ndarray:
        return np.exp(self.log_density - self.normalizer) * self.cell_volume

    def marginal(self, axis: int) -> "GroundTruthGrid":
        if self.dims == 1:
            return self
        other = 1 - axis
        logd = logsumexp(self.log_density, axis=other) + math.log(
            (self.ranges[other][1] - self.ranges[other][0]) / self.bins[other])
        width = (self.ranges[axis][1] - self.ranges[axis][0]) / self.bins[axis]
        return GroundTruthGrid((self.ranges[axis],), (self.bins[axis],), logd,
                               float(logsumexp(logd) + math.log(width)))

    def mean(self) -> np.ndarray:
        p = self.masses
        if self.dims == 1:
            return np.array([float(p @ self.centers[0])])
        cx, cy = self.centers
        return np.array([float(p.sum(1) @ cx), float(p.sum(0) @ cy)])

    def variance(self) -> np.ndarray:
        out = []
        for axis in range(self.dims):
            m = self.marginal(axis)
            p, c = m.masses, m.centers[0]
            mu = p @ c
            out.append(float(p @ (c - mu) ** 2))
        return np.array(out)

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """``n`` draws from the piecewise-constant density (cell by inverse CDF, uniform inside)."""
        p = self.masses.ravel()
        cdf = np.cumsum(p)
        cells = np.minimum(np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right"), p.size - 1)
        idx = np.unravel_index(cells, self.bins)
        out = np.empty((n, self.dims))
        for axis, e in enumerate(self.edges):
            lo = e[idx[axis]]
            out[:, axis] = lo + rng.random(n) * (e[1] - e[0])
        return out


def build_ground_truth(target: CompositeTarget, ranges: Sequence, bins, s: float = 1e-10,
                       check_coverage: bool = True) -> GroundTruthGrid:
    """Tabulate ``-U`` at the cell centers of a 1D or 2D grid.

    Raises:
        RangeCoverageError: if some axis does not contain
            ``x0_i +- R_s`` where ``R_s`` is the tail radius at level ``s``.
    """
    ranges = tuple((float(lo), float(hi)) for lo, hi in ranges)
    if target.dim > 2 or len(ranges) != target.dim:
        raise DimensionError("ground truth grids need 1 or 2 dimensions matching the target")
    if isinstance(bins, int):
        bins = (bins,) * target.dim
    bins = tuple(int(b) for b in bins)
    if check_coverage:
        rs = tail_radius(target.dissip_mu, target.dissip_beta, target.lipschitz_Md, target.dim, s)
        for (lo, hi), c in zip(ranges, target.dissip_center):
            if lo > c - rs or hi < c + rs:
                raise RangeCoverageError(
                    f"range [{lo}, {hi}] does not cover center {c:g} +- R_s = {rs:.4g}", radius=rs)
    grid = GroundTruthGrid(ranges, bins, np.zeros(bins), 0.0)
    centers = grid.centers
    if target.dim == 1:
        logd = np.array([-eval_U(target, np.array([c])) for c in centers[0]])
    else:
        logd = np.array([[-eval_U(target, np.array([a, b])) for b in centers[1]] for a in centers[0]])
    if not np.all(np.isfinite(logd)):
        raise ValueError("target log-density is not finite on the whole grid")
    norm = float(logsumexp(logd) + math.log(grid.cell_volume))
    return GroundTruthGrid(ranges, bins, logd, norm)


# --------------------------------------------------------------------------
# Distances
# --------------------------------------------------------------------------


def histogram_tv(p, q) -> float:
    """Half the L1 distance between two probability vectors (symmetric)."""
    p = np.asarray(p, dtype=float).ravel()
    q = np.asarray(q, dtype=float).ravel()
    return float(min(1.0, 0.5 * np.abs(p - q).sum()))


def empirical_tv(samples, grid: GroundTruthGrid, min_inside: int = 1000) -> float:
    """TV between the sample histogram and the grid on the grid's cells.

    Samples outside the grid form one extra cell of zero reference mass. A
    histogram TV is a lower bound on the TV over all measurable sets.

    Raises:
        ValueError: fewer than ``min_inside`` samples fall inside the grid.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[1] != grid.dims:
        raise DimensionError(f"samples have {x.shape[1]} columns, grid has {grid.dims} dims")
    n = x.shape[0]
    counts, _ = np.histogramdd(x, bins=grid.edges)
    inside = int(counts.sum())
    if inside < min_inside:
        raise ValueError(f"need at least {min_inside} samples inside the grid, got {inside}")
    off = (n - inside) / n
    if off > 0.01:
        warnings.warn(f"{100 * off:.2f}% of samples fall outside the grid", OffGridWarning)
    emp = np.append(counts.ravel() / n, off)
    ref = np.append(grid.masses.ravel(), 0.0)
    return histogram_tv(emp, ref)


# --------------------------------------------------------------------------
# Effective sample size
# --------------------------------------------------------------------------


def autocorrelation(series) -> np.ndarray:
    x = np.asarray(series, dtype=float)
    n = x.size
    x = x - x.mean()
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(x, size)
    acov = np.fft.irfft(f * np.conjugate(f), size)[:n] / n
    if not acov[0] > 0:
        raise DegenerateSeriesError("series has zero variance")
    return acov / acov[0]


def effective_sample_size(series) -> float:
    """``n / (1 + 2 sum rho_k)`` with Geyer's initial-positive-sequence truncation:
    lag pairs ``rho_{2m} + rho_{2m+1}`` are summed until the first negative pair."""
    x = np.asarray(series, dtype=float)
    if x.size < 100:
        raise ValueError("effective_sample_size needs at least 100 values")
    if np.ptp(x) == 0:
        raise DegenerateSeriesError("series is constant")
    rho = autocorrelation(x)
    n = x.size
    tau = -1.0
    for m in range(n // 2):
        pair = rho[2 * m] + rho[2 * m + 1]
        if pair < 0:
            break
        tau += 2.0 * pair
    return float(n / max(tau, 1.0 / n))


# --------------------------------------------------------------------------
# Lemma checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LemmaCheck:
    name: str
    estimate: float
    bound: float
    slack: float
    passed: Optional[bool]
    note: str = ""

    @property
    def margin(self) -> float:
        """``bound + slack - estimate``; nonnegative when the check passes."""
        return self.bound + self.slack - self.estimate


@dataclass
class LemmaReport:
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    def as_dict(self):
        return [dict(name=c.name, estimate=c.estimate, bound=c.bound, slack=c.slack,
                     margin=c.margin, passed=c.passed, note=c.note) for c in self.checks]


def lemma_bound_checks(target: CompositeTarget, oracle, x, eta: float, n_samples: int,
                       rng: np.random.Generator, n_directions: int = 10,
                       n_sigma: float = 3.0) -> LemmaReport:
    """Monte Carlo checks of three moment bounds on the proposal ``Y ~ p(x, .)``.

    * mean bias: ``||E Y - x|| <= eta (M_d + ||grad f(x)||)`` and
      the variant ``eta (2 M_d + ||grad f(x)||)`` (``proposal_mean_bias_2Md``);
      the oracle density has variance ``2 eta`` per direction, so the drift
      from ``g`` is up to ``2 eta M_d`` and the first form can fail, e.g.
      on a 1D l1 oracle centered far from the kink;
    * directional variance: ``Var <v, Y> <= 2 eta`` for random unit ``v``;
    * second moment: ``E||Y - x||^2 <= 12 eta d + 36 eta^2 (||grad f(x)||^2 + M_d^2)``,
      only when ``eta < 1/(16(L+1))`` (otherwise reported as skipped).

    Each estimate gets ``n_sigma`` standard errors of slack.
    """
    x = target.check_point(x)
    grad = np.asarray(target.f_grad(x), dtype=float)
    gnorm = float(np.linalg.norm(grad))
    md = target.lipschitz_Md
    d = target.dim
    u = x - eta * grad
    ys = oracle.sample_many(u, eta, rng, n_samples)
    report = LemmaReport()

    mean = ys.mean(axis=0)
    se = math.sqrt(float(ys.var(axis=0, ddof=1).sum()) / n_samples)
    bias = float(np.linalg.norm(mean - x))
    report.checks.append(_check("proposal_mean_bias", bias, eta * (md + gnorm), n_sigma * se))
    report.checks.append(_check("proposal_mean_bias_2Md", bias, eta * (2.0 * md + gnorm),
                                n_sigma * se))

    dirs = rng.standard_normal((n_directions, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    for j, v in enumerate(dirs):
        proj = ys @ v
        c = proj - proj.mean()
        var = float(np.mean(c ** 2))
        se_var = math.sqrt(max(float(np.mean(c ** 4)) - var * var, 0.0) / n_samples)
        report.checks.append(_check(f"directional_variance[{j}]", var, 2.0 * eta, n_sigma * se_var))

    sq = np.sum((ys - x) ** 2, axis=1)
    bound = 12.0 * eta * d + 36.0 * eta ** 2 * (gnorm ** 2 + md ** 2)
    slack = n_sigma * float(sq.std(ddof=1)) / math.sqrt(n_samples)
    if eta < 1.0 / (16.0 * (target.smoothness_L + 1.0)):
        report.checks.append(_check("second_moment", float(sq.mean()), bound, slack))
    else:
        report.checks.append(LemmaCheck("second_moment", float(sq.mean()), bound, slack, None,
                                        "skipped: eta >= 1/(16(L+1))"))
    return report


def _check(name, estimate, bound, slack):
    return LemmaCheck(name, estimate, bound, slack, bool(estimate <= bound + slack))


def detailed_balance_residual(target: CompositeTarget, oracle, x, z, eta: float) -> float:
    """``|F(x, z) / F(z, x) - 1|`` with ``F(a, b) = pi(a) p(a, b) alpha(a, b)``, all
    factors computed from their definitions (unnormalized ``pi``)."""
    x = target.check_point(x)
    z = target.check_point(z)
    fwd = (-eval_U(target, x) + proposal_log_density(target, oracle, x, z, eta)
           + log_accept_ratio(target, oracle, x, z, eta))
    bwd = (-eval_U(target, z) + proposal_log_density(target, oracle, z, x, eta)
           + log_accept_ratio(target, oracle, z, x, eta))
    return abs(math.expm1(fwd - bwd))


# --------------------------------------------------------------------------
# Chain summaries and mixing
# --------------------------------------------------------------------------


@dataclass
class ChainMetrics:
    acceptance_rate: float
    ess_per_coordinate: np.ndarray
    tv_to_truth: Optional[float] = None
    iterations_to_tv: Optional[int] = None

    def as_dict(self):
        return {
            "acceptance_rate": self.acceptance_rate,
            "ess_per_coordinate": [float(v) for v in self.ess_per_coordinate],
            "tv_to_truth": self.tv_to_truth,
            "iterations_to_tv": self.iterations_to_tv,
        }


def chain_metrics(results: list, grid: Optional[GroundTruthGrid] = None,
                  burn_in: int = 0) -> ChainMetrics:
    """Pooled acceptance rate (accepted over non-lazy steps), ESS summed over
    chains per coordinate, and TV of the pooled post-burn-in samples."""
    acc = sum(int(r.accepted[~r.lazy_holds].sum()) for r in results)
    active = sum(int((~r.lazy_holds).sum()) for r in results)
    dim = results[0].samples.shape[1]
    ess = np.zeros(dim)
    for r in results:
        kept = r.samples[burn_in:]
        for i in range(dim):
            try:
                ess[i] += effective_sample_size(kept[:, i])
            except (DegenerateSeriesError, ValueError):
                pass
    tv = None
    if grid is not None:
        pooled = np.concatenate([r.samples[burn_in:] for r in results])
        tv = empirical_tv(pooled, grid)
    return ChainMetrics(acc / active if active else float("nan"), ess, tv)


def equal_mass_edges(grid: GroundTruthGrid, n_bins: int) -> np.ndarray:
    """Edges of ``n_bins`` cells of roughly equal reference mass, built from grid cells."""
    if grid.dims != 1:
        raise DimensionError("equal-mass binning needs a 1D grid")
    edges = grid.edges[0]
    cdf = np.concatenate([[0.0], np.cumsum(grid.masses)])
    cuts = np.searchsorted(cdf, np.arange(1, n_bins) / n_bins)
    inner = np.unique(edges[np.clip(cuts, 1, len(edges) - 2)])
    return np.concatenate([[-np.inf], inner, [np.inf]])


def _coarse_masses(grid, edges):
    cdf = np.concatenate([[0.0], np.cumsum(grid.masses)])
    idx = np.searchsorted(grid.edges[0], edges[1:-1])
    return np.diff(np.concatenate([[0.0], cdf[idx], [1.0]]))


@dataclass
class MixingEstimate:
    iterations: Optional[int]
    group_iterations: list
    tv_curve: np.ndarray
    acceptance_rate: float


def estimate_mixing(target: CompositeTarget, oracle, config: SamplerConfig,
                    marginal_truth, n_chains: int = 200, threshold: float = 0.1,
                    max_steps: int = 10_000, algorithm: str = "prox_mh", n_bins: int = 5,
                    n_groups: int = 1, coordinates: Optional[Sequence[int]] = None) -> MixingEstimate:
    """First iteration at which the across-chain marginal law is within ``threshold``.

    ``n_chains`` independent chains (chain ``i`` on stream ``i`` of
    ``config.seed``) advance in lockstep. At each iteration the empirical law of
    ``X_k[i]`` across chains is compared with ``marginal_truth`` on ``n_bins``
    equal-mass bins, and the TV is averaged over ``coordinates`` (all by
    default). ``marginal_truth`` is one 1D grid shared by every coordinate or a
    list with one grid per coordinate. Chains are
    split into ``n_groups`` groups; the estimate is the median of the per-group
    first-passage iterations (``None`` if a group never gets there).
    """
    coords = list(range(target.dim)) if coordinates is None else list(coordinates)
    truths = (list(marginal_truth) if isinstance(marginal_truth, (list, tuple))
              else [marginal_truth] * len(coords))
    if len(truths) != len(coords):
        raise DimensionError(f"{len(truths)} marginal grids for {len(coords)} coordinates")
    edges = [equal_mass_edges(m, n_bins) for m in truths]
    refs = [_coarse_masses(m, e) for m, e in zip(truths, edges)]
    streams = chain_streams(config.seed, n_chains)
    start, transition = make_kernel(target, oracle, config, algorithm)
    states = [start(initial_point(target, config.init, s.init)) for s in streams]
    groups = np.array_split(np.arange(n_chains), n_groups)
    first = [None] * n_groups
    curve = []
    accepted = active = 0

    def group_tv(members):
        xs = np.array([states[i].x[coords] for i in members])
        tvs = []
        for j in range(len(coords)):
            counts = np.bincount(np.searchsorted(edges[j], xs[:, j], side="right") - 1,
                                 minlength=len(refs[j]))
            tvs.append(histogram_tv(counts / len(members), refs[j]))
        return float(np.mean(tvs))

    for t in range(max_steps + 1):
        tvs = [group_tv(g) for g in groups]
        curve.append(float(np.mean(tvs)))
        for k, tv in enumerate(tvs):
            if first[k] is None and tv <= threshold:
                first[k] = t
        if all(f is not None for f in first) or t == max_steps:
            break
        for i, s in enumerate(streams):
            out = transition(states[i], s.transition)
            states[i] = out.next
            if not out.was_lazy_hold:
                active += 1
                accepted += int(out.accepted)
    its = None
    if all(f is not None for f in first):
        its = int(np.median(first))
    return MixingEstimate(its, first, np.array(curve), accepted / active if active else float("nan"))
