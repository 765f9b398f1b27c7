"""Ready-made composite targets (Gaussian/l1 products, Bayesian lasso, group lasso)."""

from __future__ import annotations

import numpy as np

from .core import CompositeTarget, GroupLasso, ScaledL1, SeparableGeneric, Zero


def _quadratic(mean):
    mean = np.asarray(mean, dtype=float)

    def f_value(x):
        d = x - mean
        return 0.5 * float(d @ d)

    def f_grad(x):
        return x - mean

    return f_value, f_grad


def standard_gaussian(dim: int = 1) -> CompositeTarget:
    f, df = _quadratic(np.zeros(dim))
    return CompositeTarget(dim, f, df, Zero(), smoothness_L=1.0, dissip_mu=1.0,
                           name=f"gaussian(d={dim})")


def gaussian_l1(dim: int = 1, lam: float = 1.0, mean=None) -> CompositeTarget:
    """``f = ||x - mean||^2 / 2``, ``g = lam ||x||_1`` (``g = 0`` when ``lam = 0``)."""
    mean = np.zeros(dim) if mean is None else np.broadcast_to(np.asarray(mean, float), (dim,)).copy()
    f, df = _quadratic(mean)
    g = ScaledL1(lam) if lam > 0 else Zero()
    return CompositeTarget(dim, f, df, g, smoothness_L=1.0, dissip_mu=1.0,
                           dissip_beta=0.0, dissip_center=mean,
                           name=f"gaussian_l1(d={dim}, lam={lam:g})")


def lasso_posterior(design, response, lam: float, noise_var: float = 1.0) -> CompositeTarget:
    """Bayesian lasso: ``f(b) = ||y - X b||^2 / (2 sigma^2)``, ``g = lam ||b||_1``.

    ``L`` and ``mu`` are the extreme eigenvalues of ``X^T X / sigma^2``; the
    design must have full column rank.
    """
    X = np.asarray(design, dtype=float)
    y = np.asarray(response, dtype=float).ravel()
    if X.ndim != 2 or X.shape[0] != y.size:
        raise ValueError(f"design {X.shape} and response ({y.size},) are inconsistent")
    gram = X.T @ X / noise_var
    eig = np.linalg.eigvalsh(gram)
    if not eig[0] > 1e-12 * max(eig[-1], 1.0):
        raise ValueError("design matrix must have full column rank")
    Xty = X.T @ y / noise_var
    center = np.linalg.solve(gram, Xty)

    def f_value(b):
        r = y - X @ b
        return 0.5 * float(r @ r) / noise_var

    def f_grad(b):
        return gram @ b - Xty

    return CompositeTarget(X.shape[1], f_value, f_grad, ScaledL1(lam), smoothness_L=float(eig[-1]),
                           dissip_mu=float(eig[0]), dissip_beta=0.0, dissip_center=center,
                           name=f"lasso_posterior(n={X.shape[0]}, p={X.shape[1]}, lam={lam:g})")


def group_lasso_target(dim: int, groups, weights=None, mean=None) -> CompositeTarget:
    """``f = ||x - mean||^2 / 2``, ``g = sum_j w_j ||x_{G_j}||``."""
    mean = np.zeros(dim) if mean is None else np.broadcast_to(np.asarray(mean, float), (dim,)).copy()
    f, df = _quadratic(mean)
    spec = GroupLasso(groups, weights)
    return CompositeTarget(dim, f, df, spec, smoothness_L=1.0, dissip_mu=1.0, dissip_center=mean,
                           name=f"group_lasso(d={dim}, groups={len(spec.groups)})")


def pseudo_huber_target(dim: int = 2, scale: float = 1.0, mean=None) -> CompositeTarget:
    """Separable ``g_i(y) = c (sqrt(1 + y^2) - 1)``, each ``c``-Lipschitz."""
    mean = np.zeros(dim) if mean is None else np.broadcast_to(np.asarray(mean, float), (dim,)).copy()
    f, df = _quadratic(mean)

    def gi(y):
        return scale * (np.sqrt(1.0 + np.square(y)) - 1.0)

    def dgi(y):
        return scale * y / np.sqrt(1.0 + y * y)

    spec = SeparableGeneric((gi,) * dim, (scale,) * dim, subgrads=(dgi,) * dim)
    return CompositeTarget(dim, f, df, spec, smoothness_L=1.0, dissip_mu=1.0, dissip_center=mean,
                           name=f"pseudo_huber(d={dim}, c={scale:g})")


def synthetic_lasso_data(n: int = 30, p: int = 3, seed: int = 0, noise: float = 1.0):
    """Gaussian design and a sparse coefficient vector; returns ``(X, y, beta)``."""
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p)) / np.sqrt(n)
    beta = np.zeros(p)
    beta[: max(1, p // 2)] = 2.0
    y = X @ beta + noise * rng.standard_normal(n)
    return X, y, beta


def bundled_targets() -> dict:
    """Five small targets covering every built-in oracle type."""
    X, y, _ = synthetic_lasso_data()
    return {
        "lasso_1d": gaussian_l1(1, 1.0, [1.0]),
        "gaussian_l1_5d": gaussian_l1(5, 1.0, np.linspace(-1.0, 1.0, 5)),
        "lasso_posterior_3d": lasso_posterior(X, y, 1.0),
        "group_lasso_4d": group_lasso_target(4, [(0, 1), (2, 3)], [1.0, 0.5], [1.0, 0.0, -0.5, 0.5]),
        "pseudo_huber_2d": pseudo_huber_target(2, 1.0, [0.5, -0.5]),
    }
