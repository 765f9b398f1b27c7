"""Moreau proximity operator and envelope for every regularizer variant."""

from __future__ import annotations

import numpy as np

from ..core import Custom, GroupLasso, ScaledL1, SeparableGeneric, Zero, regularizer_value
from ..errors import UnsupportedOperationError
from .logconcave import locate_mode


def soft_threshold(x, thresh):
    return np.sign(x) * np.maximum(np.abs(x) - thresh, 0.0)


def group_shrink(x, groups, weights, eta):
    out = np.array(x, dtype=float)
    for grp, w in zip(groups, weights):
        idx = list(grp)
        nrm = float(np.linalg.norm(out[idx]))
        out[idx] = 0.0 if nrm <= eta * w else out[idx] * (1.0 - eta * w / nrm)
    return out


def prox_map(g_spec, x, eta: float) -> np.ndarray:
    """``argmin_y ||y - x||^2 / (2 eta) + g(y)``."""
    x = np.asarray(x, dtype=float)
    if isinstance(g_spec, Zero):
        return x.copy()
    if isinstance(g_spec, ScaledL1):
        return soft_threshold(x, eta * g_spec.lam)
    if isinstance(g_spec, GroupLasso):
        return group_shrink(x, g_spec.groups, g_spec.weights, eta)
    if isinstance(g_spec, SeparableGeneric):
        out = np.empty_like(x)
        for i, (gi, xi) in enumerate(zip(g_spec.funcs, x)):
            if g_spec.proxes is not None:
                out[i] = float(g_spec.proxes[i](float(xi), eta))
            else:
                out[i] = locate_mode(lambda y, gi=gi, xi=xi: -(y - xi) ** 2 / (2 * eta) - float(gi(y)),
                                     float(xi), scale=max(np.sqrt(eta), 1e-8), tol=1e-13)
        return out
    if isinstance(g_spec, Custom):
        if g_spec.prox is None:
            raise UnsupportedOperationError("Custom regularizer has no prox")
        return np.asarray(g_spec.prox(x, eta), dtype=float)
    raise TypeError(f"unknown regularizer {g_spec!r}")


def moreau_envelope(g_spec, x, eta: float):
    """Value and gradient of ``g^eta(x) = min_y g(y) + ||y - x||^2 / (2 eta)``.

    The gradient is ``(x - prox(x)) / eta`` and is ``1/eta``-Lipschitz.
    """
    x = np.asarray(x, dtype=float)
    p = prox_map(g_spec, x, eta)
    diff = x - p
    value = regularizer_value(g_spec, p) + float(diff @ diff) / (2.0 * eta)
    return value, diff / eta
