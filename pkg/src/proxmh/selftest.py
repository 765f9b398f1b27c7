"""Fast invariant checks, run by ``proxmh selftest``.

Each check prints one ``PASS``/``FAIL`` line. The quick set is deterministic
and takes about a second; the full set adds short statistical checks.
"""

from __future__ import annotations

import math
import time

import numpy as np
from scipy import stats

from .core import SamplerConfig, ScaledL1, SeparableGeneric
from .diagnostics import build_ground_truth, detailed_balance_residual, empirical_tv
from .oracles import L1Oracle, ZeroOracle, make_oracle, prox_map, soft_threshold
from .oracles.quadrature import Quadrature1DConfig, quadrature_1d
from .oracles.truncnorm import TruncatedNormalParams, sample_truncated_normal
from .rng import chain_streams
from .sampler import auto_step_size, log_accept_ratio, proposal_log_density, run_chain
from .targets import gaussian_l1, pseudo_huber_target, standard_gaussian


def _laplace_partition(rng):
    worst = 0.0
    for _ in range(10):
        u, eta, lam = rng.uniform(-3, 3), 10 ** rng.uniform(-3, 0), rng.uniform(0.1, 3)
        ref = quadrature_1d(lambda y: -(y - u) ** 2 / (4 * eta) - lam * abs(y),
                            Quadrature1DConfig(center=u, scale=math.sqrt(2 * eta), breakpoints=(0.0,)))[0]
        got = L1Oracle(ScaledL1(lam)).log_partition(np.array([u]), eta)
        worst = max(worst, abs(got - ref) / abs(ref))
    return worst <= 1e-8, f"max rel err {worst:.2e}"


def _smooth_reduction(rng):
    tg = standard_gaussian(3)
    oracle = ZeroOracle()
    worst = 0.0
    for _ in range(20):
        x, z, eta = rng.standard_normal(3), rng.standard_normal(3), 10 ** rng.uniform(-3, -0.5)
        mean = x - eta * x
        ref_q = -float((z - mean) @ (z - mean)) / (4 * eta) - 1.5 * math.log(4 * math.pi * eta)
        back = z - eta * z
        ref_a = min(0.0, -0.5 * z @ z - float((x - back) @ (x - back)) / (4 * eta)
                    + 0.5 * x @ x + float((z - mean) @ (z - mean)) / (4 * eta))
        worst = max(worst, abs(proposal_log_density(tg, oracle, x, z, eta) - ref_q),
                    abs(log_accept_ratio(tg, oracle, x, z, eta) - ref_a))
    return worst <= 1e-10, f"max abs err {worst:.2e}"


def _detailed_balance(rng):
    tg = gaussian_l1(1, 1.0, [1.0])
    oracle = make_oracle(tg.g_spec)
    worst = max(detailed_balance_residual(tg, oracle, rng.uniform(-3, 4, 1), rng.uniform(-3, 4, 1), 0.05)
                for _ in range(20))
    return worst <= 1e-8, f"max rel residual {worst:.2e}"


def _prox_identity(rng):
    x = rng.uniform(-3, 3, 8)
    spec = SeparableGeneric((np.abs,) * 8, (1.0,) * 8)
    err = float(np.max(np.abs(prox_map(spec, x, 0.7) - soft_threshold(x, 0.7))))
    return err <= 1e-7, f"max abs err {err:.2e}"


def _determinism(rng):
    tg = pseudo_huber_target(2, 1.0, [0.5, -0.5])
    cfg = SamplerConfig(eta=auto_step_size(tg), n_steps=50, seed=int(rng.integers(2**31)))
    a = run_chain(tg, make_oracle(tg.g_spec), cfg)
    b = run_chain(tg, make_oracle(tg.g_spec), cfg)
    same = np.array_equal(a.samples, b.samples) and np.array_equal(a.accepted, b.accepted)
    return same, "identical" if same else "trajectories differ"


def _truncnorm(rng):
    p = TruncatedNormalParams(0.3, 0.5, 1.5, 4.0)
    xs = np.array([sample_truncated_normal(p, rng) for _ in range(20_000)])
    a, b = p.standardized()
    ks = stats.kstest(xs, stats.truncnorm(a, b, loc=p.mean, scale=p.std).cdf).statistic
    inside = bool(np.all((xs >= p.lower) & (xs <= p.upper)))
    return inside and ks < 0.015, f"KS {ks:.4f}"


def _stationarity(rng):
    tg = gaussian_l1(1, 1.0, [1.0])
    cfg = SamplerConfig(eta=auto_step_size(tg), n_steps=20_000, seed=int(rng.integers(2**31)))
    res = run_chain(tg, make_oracle(tg.g_spec), cfg, streams=chain_streams(cfg.seed, 1)[0])
    grid = build_ground_truth(tg, [(-6.0, 8.0)], 20)
    tv = empirical_tv(res.samples[1000:], grid)
    return tv <= 0.05, f"20-bin TV {tv:.4f}"


QUICK = [("laplace_log_partition", _laplace_partition), ("smooth_reduction", _smooth_reduction),
         ("detailed_balance", _detailed_balance), ("prox_identity", _prox_identity),
         ("determinism", _determinism)]
FULL = [("truncated_normal_ks", _truncnorm), ("stationarity_1d_lasso", _stationarity)]


def run_selftest(seed: int = 0, quick: bool = False, out=print) -> bool:
    rng = np.random.default_rng(seed)
    ok = True
    for name, fn in QUICK + ([] if quick else FULL):
        t0 = time.perf_counter()
        try:
            passed, detail = fn(rng)
        except Exception as e:  # a crash is a failure, reported like one
            passed, detail = False, f"{type(e).__name__}: {e}"
        ok &= bool(passed)
        out(f"{'PASS' if passed else 'FAIL'} {name:<24} {detail} ({time.perf_counter() - t0:.2f}s)")
    return ok
