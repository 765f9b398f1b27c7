"""Build targets from configs, run chains, compute diagnostics and write results."""

from __future__ import annotations

import json
import math
import platform
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy

from .. import __version__
from ..core import CompositeTarget, ExplicitPoint, GaussianAtCenter, SamplerConfig
from ..diagnostics import (build_ground_truth, chain_metrics, estimate_mixing,
                           lemma_bound_checks)
from ..errors import ConfigError
from ..oracles import make_oracle
from ..sampler import auto_step_size, run_chains, smoothed_target, tail_radius, tune
from ..targets import gaussian_l1, group_lasso_target, lasso_posterior
from .config import ExperimentConfig, GaussianL1Spec, GroupLassoSpec, LassoPosteriorSpec

GRID_BINS = 200
MARGINAL_BINS = 2000
TAIL_LEVEL = 1e-10


def build_target(spec) -> CompositeTarget:
    try:
        if isinstance(spec, GaussianL1Spec):
            return gaussian_l1(spec.dim, spec.lam, spec.mean)
        if isinstance(spec, GroupLassoSpec):
            return group_lasso_target(spec.dim, spec.groups, spec.weights, spec.mean)
        if isinstance(spec, LassoPosteriorSpec):
            X = np.loadtxt(spec.design, delimiter=",", ndmin=2)
            y = np.loadtxt(spec.response, delimiter=",", ndmin=1)
            return lasso_posterior(X, y, spec.lam, spec.noise_var)
    except ValueError as e:
        raise ConfigError(f"target: {e}") from e
    raise ConfigError(f"unknown target family {spec!r}")


def _vector(val, dim):
    return None if val is None else np.broadcast_to(np.asarray(val, dtype=float), (dim,)).copy()


@dataclass
class Prepared:
    """Everything needed to run one config: the target actually sampled, its oracle and the kernel."""

    target: CompositeTarget
    chain_target: CompositeTarget
    oracle: object
    kernel: str
    sampler_config: SamplerConfig
    eta: float
    eta_source: str


def prepare(cfg: ExperimentConfig) -> Prepared:
    target = build_target(cfg.target)
    s = cfg.sampler
    eta = auto_step_size(target) if s.eta == "auto" else float(s.eta)
    init = (ExplicitPoint(_vector(s.init.point, target.dim)) if s.init.kind == "point"
            else GaussianAtCenter(_vector(s.init.center, target.dim)))
    sc = SamplerConfig(eta=eta, n_steps=s.n_steps, seed=s.seed, lazy=s.lazy, init=init)
    source = "auto" if s.eta == "auto" else "config"
    if s.algorithm == "prox_mh":
        return Prepared(target, target, make_oracle(target.g_spec), "prox_mh", sc, eta, source)
    chain_target = target
    if s.algorithm == "smoothed_mala":
        chain_target = smoothed_target(target, s.smoothing or eta)
    kernel = "ula" if s.algorithm == "ula" else "mala"
    return Prepared(target, chain_target, None, kernel, sc, eta, source)


def default_ranges(target: CompositeTarget):
    rs = tail_radius(target.dissip_mu, target.dissip_beta, target.lipschitz_Md, target.dim, TAIL_LEVEL)
    return [(c - rs - 1.0, c + rs + 1.0) for c in target.dissip_center]


def truth_grid(cfg: ExperimentConfig, target: CompositeTarget):
    """Ground truth for 1D/2D targets; ``None`` above two dimensions."""
    if target.dim > 2:
        return None
    g = cfg.diagnostics.grid
    try:
        if g is None:
            return build_ground_truth(target, default_ranges(target), GRID_BINS, TAIL_LEVEL)
        return build_ground_truth(target, g.ranges, g.bins, TAIL_LEVEL)
    except ValueError as e:
        raise ConfigError(f"diagnostics.grid: {e}") from e


def marginal_truths(target: CompositeTarget, cfg: ExperimentConfig):
    """One 1D grid per coordinate, when the marginals are available exactly.

    Available for any target in one or two dimensions (by summing the grid)
    and for ``gaussian_l1`` in any dimension (it is a product).
    """
    spec = cfg.target
    if isinstance(spec, GaussianL1Spec):
        out = []
        for m in target.dissip_center:
            one = gaussian_l1(1, spec.lam, [m])
            out.append(build_ground_truth(one, default_ranges(one), MARGINAL_BINS, TAIL_LEVEL))
        return out
    if target.dim <= 2:
        grid = build_ground_truth(target, default_ranges(target), GRID_BINS * 2, TAIL_LEVEL)
        return [grid.marginal(i) for i in range(target.dim)]
    return None


# --------------------------------------------------------------------------
# Output
# --------------------------------------------------------------------------


def _fmt(v: float) -> str:
    return "%.17g" % v


def samples_csv(results) -> str:
    """``chain,step,accepted,x_1..x_d``; step 0 is the initial point (accepted = 0)."""
    dim = results[0].samples.shape[1]
    lines = ["chain,step,accepted," + ",".join(f"x_{i + 1}" for i in range(dim))]
    for c, r in enumerate(results):
        acc = np.concatenate([[False], r.accepted])
        for t, (a, row) in enumerate(zip(acc, r.samples)):
            lines.append(f"{c},{t},{int(a)}," + ",".join(map(_fmt, row)))
    return "\n".join(lines) + "\n"


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj) if math.isfinite(obj) else None
    return obj


def write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n")


def manifest(cfg: ExperimentConfig, files) -> dict:
    return {
        "config_hash": cfg.config_hash(),
        "seed": cfg.sampler.seed,
        "library": "proxmh",
        "version": __version__,
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "python": platform.python_version(),
        "files": sorted(files),
    }


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def run_experiment(cfg: ExperimentConfig, out_dir: Optional[Path] = None, threads: int = 1) -> dict:
    """Run all chains of ``cfg`` and write samples.csv, metrics.json and manifest.json.

    Returns the metrics dictionary.
    """
    t_start = time.perf_counter()
    out = Path(out_dir) if out_dir is not None else cfg.output.directory
    prep = prepare(cfg)
    grid = truth_grid(cfg, prep.target)
    report = tune(prep.target)

    t0 = time.perf_counter()
    results = run_chains(prep.chain_target, prep.oracle, prep.sampler_config, cfg.sampler.n_chains,
                         prep.kernel, threads)
    sampling = time.perf_counter() - t0

    try:
        cm = chain_metrics(results, grid, cfg.diagnostics.burn_in)
    except ValueError:
        # too few samples on the grid for a TV estimate
        cm = chain_metrics(results, None, cfg.diagnostics.burn_in)
    metrics = {
        "target": prep.target.name,
        "algorithm": cfg.sampler.algorithm,
        "eta": prep.eta,
        "eta_source": prep.eta_source,
        "n_chains": cfg.sampler.n_chains,
        "n_steps": cfg.sampler.n_steps,
        "acceptance_rate": cm.acceptance_rate,
        "acceptance_rate_per_chain": [r.acceptance_rate for r in results],
        "ess": list(cm.ess_per_coordinate),
        "ess_min": float(np.min(cm.ess_per_coordinate)),
        "ess_per_sec": float(np.min(cm.ess_per_coordinate)) / sampling if sampling > 0 else None,
        "tv_to_truth": cm.tv_to_truth,
        "tv_grid": None if grid is None else {"ranges": grid.ranges, "bins": grid.bins},
        "tuning": report.as_dict(),
        "lemma_checks": None,
    }
    if cfg.diagnostics.lemma_checks and cfg.sampler.algorithm == "prox_mh":
        rng = np.random.default_rng(cfg.sampler.seed)
        lr = lemma_bound_checks(prep.target, prep.oracle, prep.target.dissip_center, prep.eta,
                                cfg.diagnostics.lemma_samples, rng)
        metrics["lemma_checks"] = lr.as_dict()

    out.mkdir(parents=True, exist_ok=True)
    files = []
    if "csv" in cfg.output.formats:
        (out / "samples.csv").write_text(samples_csv(results))
        files.append("samples.csv")
    metrics["wall_clock_seconds"] = {"sampling": sampling, "total": time.perf_counter() - t_start}
    if "json" in cfg.output.formats:
        write_json(out / "metrics.json", metrics)
        files.append("metrics.json")
    write_json(out / "manifest.json", manifest(cfg, files + ["manifest.json"]))
    return metrics


def _target_key(cfg: ExperimentConfig) -> str:
    # configs compare the same target family and parameters; ``dim`` may differ
    # so one family can be followed across dimensions
    raw = cfg.target.model_dump(mode="json", by_alias=True, exclude={"dim"})
    return json.dumps(raw, sort_keys=True)


COMPARE_COLUMNS = ("label", "algorithm", "dim", "eta", "iterations_to_tv", "acceptance_rate",
                   "ess_per_sec")


def compare_row(cfg: ExperimentConfig, label: str, threads: int = 1) -> dict:
    prep = prepare(cfg)
    d = cfg.diagnostics
    t0 = time.perf_counter()
    results = run_chains(prep.chain_target, prep.oracle, prep.sampler_config, cfg.sampler.n_chains,
                         prep.kernel, threads)
    sampling = time.perf_counter() - t0
    cm = chain_metrics(results, None, d.burn_in)
    truths = marginal_truths(prep.target, cfg)
    its = None
    if truths is not None:
        mix = estimate_mixing(prep.chain_target, prep.oracle, prep.sampler_config, truths,
                              n_chains=d.mixing_chains, threshold=d.tv_threshold,
                              max_steps=d.mixing_max_steps, algorithm=prep.kernel,
                              n_bins=d.mixing_bins, n_groups=d.mixing_groups)
        its = mix.iterations
    ess = float(np.min(cm.ess_per_coordinate))
    return {
        "label": label,
        "algorithm": cfg.sampler.algorithm,
        "dim": prep.target.dim,
        "eta": prep.eta,
        "iterations_to_tv": its,
        "acceptance_rate": cm.acceptance_rate,
        "ess_per_sec": ess / sampling if sampling > 0 else None,
    }


def compare_command(configs, labels=None, out_dir: Optional[Path] = None, threads: int = 1) -> list:
    """One row per config: iterations to the TV threshold (median over chain
    groups), acceptance rate and ESS per second. Writes comparison.csv/json."""
    if len(configs) < 2:
        raise ConfigError("compare needs at least two configs")
    keys = {_target_key(c) for c in configs}
    if len(keys) != 1:
        raise ConfigError("compare needs configs over the same target (family and parameters)")
    labels = labels or [f"config_{i}" for i in range(len(configs))]
    rows = [compare_row(c, lab, threads) for c, lab in zip(configs, labels)]
    out = Path(out_dir) if out_dir is not None else configs[0].output.directory
    out.mkdir(parents=True, exist_ok=True)
    lines = [",".join(COMPARE_COLUMNS)]
    for r in rows:
        cells = []
        for k in COMPARE_COLUMNS:
            v = r[k]
            cells.append("" if v is None else _fmt(v) if isinstance(v, float) else str(v))
        lines.append(",".join(cells))
    (out / "comparison.csv").write_text("\n".join(lines) + "\n")
    write_json(out / "comparison.json", {"rows": rows})
    return rows


def tune_command(cfg: ExperimentConfig) -> dict:
    target = build_target(cfg.target)
    rep = tune(target)
    return {"target": target.name, "auto_eta": auto_step_size(target), **rep.as_dict()}
