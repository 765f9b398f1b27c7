"""Metropolis-adjusted proximal gradient Langevin sampling for ``pi ~ exp(-f - g)``.

``f`` is smooth, ``g`` is convex and Lipschitz but possibly non-smooth. Each
step draws from the proximal sampling oracle at ``x - eta grad f(x)`` and
applies a Metropolis filter, so the chain leaves ``pi`` invariant exactly.
"""

__version__ = "0.1.0"

from .core import (ChainState, CompositeTarget, Custom, ExplicitPoint, GaussianAtCenter, GroupLasso,
                   SamplerConfig, ScaledL1, SeparableGeneric, Zero, eval_U, grad_U, subgrad_g)
from .errors import (ConfigError, DegenerateSeriesError, DimensionError, NonFinitePotentialError,
                     NotLogConcaveError, OracleError, ProxMHError, QuadratureError,
                     RangeCoverageError, SamplerError, UnsupportedOperationError)
from .oracles import log_partition, make_oracle, prox_map, sample_prox
from .sampler import (ChainResult, StepOutcome, TuningReport, auto_step_size, log_accept_ratio,
                      make_state, mala_step, proposal_log_density, run_chain, run_chains,
                      smoothed_target, step, tune, ula_step)
from .diagnostics import (GroundTruthGrid, build_ground_truth, detailed_balance_residual,
                          effective_sample_size, empirical_tv, estimate_mixing, histogram_tv,
                          lemma_bound_checks)

__all__ = [
    "__version__",
    "ChainState", "CompositeTarget", "Custom", "ExplicitPoint", "GaussianAtCenter", "GroupLasso",
    "SamplerConfig", "ScaledL1", "SeparableGeneric", "Zero", "eval_U", "grad_U", "subgrad_g",
    "ConfigError", "DegenerateSeriesError", "DimensionError", "NonFinitePotentialError",
    "NotLogConcaveError", "OracleError", "ProxMHError", "QuadratureError", "RangeCoverageError",
    "SamplerError", "UnsupportedOperationError",
    "log_partition", "make_oracle", "prox_map", "sample_prox",
    "ChainResult", "StepOutcome", "TuningReport", "auto_step_size", "log_accept_ratio",
    "make_state", "mala_step", "proposal_log_density", "run_chain", "run_chains",
    "smoothed_target", "step", "tune", "ula_step",
    "GroundTruthGrid", "build_ground_truth", "detailed_balance_residual", "effective_sample_size",
    "empirical_tv", "estimate_mixing", "histogram_tv", "lemma_bound_checks",
]
