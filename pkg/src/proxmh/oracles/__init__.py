"""Proximal sampling oracles and the 1D primitives behind them."""

from .base import (CustomOracle, GroupLassoOracle, L1Oracle, ProxOracle, SeparableOracle,
                   ZeroOracle, log_partition, make_oracle, sample_prox)
from .group_lasso import GroupGridSampler, group_lasso_oracle_sample, group_log_partition
from .laplace import laplace_log_partition, laplace_oracle_mixture, laplace_sample
from .logconcave import LogConcaveEnvelope, locate_mode, sample_logconcave_1d
from .prox import moreau_envelope, prox_map, soft_threshold
from .quadrature import Quadrature1DConfig, quadrature_1d
from .truncnorm import TruncatedNormalParams, sample_truncated_normal

__all__ = [
    "CustomOracle", "GroupGridSampler", "GroupLassoOracle", "L1Oracle", "LogConcaveEnvelope",
    "ProxOracle", "Quadrature1DConfig", "SeparableOracle", "TruncatedNormalParams", "ZeroOracle",
    "group_lasso_oracle_sample", "group_log_partition", "laplace_log_partition",
    "laplace_oracle_mixture", "laplace_sample", "locate_mode", "log_partition", "make_oracle",
    "moreau_envelope", "prox_map", "quadrature_1d", "sample_logconcave_1d", "sample_prox",
    "sample_truncated_normal", "soft_threshold",
]
