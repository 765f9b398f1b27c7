import math

import numpy as np
import pytest
from scipy import integrate, stats

from proxmh.oracles import GroupGridSampler, group_lasso_oracle_sample, group_log_partition
from proxmh.oracles.laplace import laplace_log_partition

# mpmath 2D quadrature, u=(1,0), eta=0.25, w=1
LOG_Z_2D = 0.0270484380721550523123820671818
MEAN_A_2D = 0.691482574239002828942510948333


def dblquad_log_z(u, eta, w):
    """2D reference in polar coordinates about the origin, where ``w ||y||`` is smooth."""
    rmax = math.hypot(*u) + 12 * math.sqrt(2 * eta)
    f = lambda th, r: r * math.exp(-((r * math.cos(th) - u[0]) ** 2 + (r * math.sin(th) - u[1]) ** 2)  # noqa: E731
                                   / (4 * eta) - w * r)
    return math.log(integrate.dblquad(f, 0, rmax, 0, 2 * math.pi, epsabs=1e-13, epsrel=1e-11)[0])


def axial_log_z_3d(b, eta, w):
    """3D integral in cylindrical coordinates around u = (b, 0, 0)."""
    f = lambda r, a: 2 * math.pi * r * math.exp(-((a - b) ** 2 + r * r) / (4 * eta)  # noqa: E731
                                                - w * math.hypot(a, r))
    return math.log(integrate.dblquad(f, b - 8, b + 8, 0, 8, epsabs=1e-13, epsrel=1e-11)[0])


def test_log_z_2d_frozen():
    assert group_log_partition(np.array([1.0, 0.0]), 0.25, 1.0) == pytest.approx(LOG_Z_2D, rel=1e-12)


@pytest.mark.parametrize("u,eta,w", [((0.7, -0.3), 0.1, 1.0), ((2.0, 1.0), 0.5, 0.3),
                                     ((0.0, 0.0), 0.2, 2.0), ((-0.1, 0.05), 0.05, 4.0)])
def test_log_z_2d_against_dblquad(u, eta, w):
    assert group_log_partition(np.array(u), eta, w) == pytest.approx(dblquad_log_z(u, eta, w), rel=1e-8)


@pytest.mark.parametrize("b,eta,w", [(2.0, 0.1, 1.0), (0.5, 0.3, 0.5), (0.0, 0.25, 1.0)])
def test_log_z_3d_against_axial_quadrature(b, eta, w):
    u = np.array([b, 0.0, 0.0])
    rot = np.linalg.qr(np.random.default_rng(3).normal(size=(3, 3)))[0]
    assert group_log_partition(rot @ u, eta, w) == pytest.approx(axial_log_z_3d(b, eta, w), rel=1e-8)


def test_log_z_3d_against_tplquad():
    u, eta, w = np.array([0.4, -0.2, 0.3]), 0.1, 1.0
    f = lambda z, y, x: math.exp(-((x - u[0]) ** 2 + (y - u[1]) ** 2 + (z - u[2]) ** 2) / (4 * eta)  # noqa: E731
                                 - w * math.sqrt(x * x + y * y + z * z))
    ref = math.log(integrate.tplquad(f, -3, 3, -3, 3, -3, 3, epsabs=1e-10, epsrel=1e-8)[0])
    assert group_log_partition(u, eta, w) == pytest.approx(ref, rel=1e-6)


def test_size_one_group_is_laplace():
    assert group_log_partition(np.array([0.8]), 0.2, 1.5) == laplace_log_partition(np.array([0.8]), 0.2, 1.5)


def test_sample_mean_2d(rng):
    ys = np.array([group_lasso_oracle_sample(np.array([1.0, 0.0]), 0.25, 1.0, rng) for _ in range(50_000)])
    se = ys.std(axis=0, ddof=1) / math.sqrt(len(ys))
    assert abs(ys[:, 0].mean() - MEAN_A_2D) <= 3 * se[0]
    assert abs(ys[:, 1].mean()) <= 3 * se[1]


def test_grid_method_mean_2d(rng):
    sampler = GroupGridSampler(np.array([1.0, 0.0]), 0.25, 1.0)
    ys = np.array([sampler.sample(rng) for _ in range(20_000)])
    se = ys.std(axis=0, ddof=1) / math.sqrt(len(ys))
    assert abs(ys[:, 0].mean() - MEAN_A_2D) <= 4 * se[0]
    assert abs(ys[:, 1].mean()) <= 4 * se[1]


def test_zero_weight_zero_center_is_gaussian(rng):
    eta = 0.3
    ys = np.array([group_lasso_oracle_sample(np.zeros(3), eta, 0.0, rng) for _ in range(20_000)])
    r2 = (ys ** 2).sum(axis=1)
    assert abs(r2.mean() - 3 * 2 * eta) <= 3 * r2.std() / math.sqrt(r2.size)


def test_axial_marginal_ks_3d(rng):
    eta, w = 0.1, 1.0
    u = np.array([2.0, 0.0, 0.0])
    ys = np.array([group_lasso_oracle_sample(u, eta, w, rng) for _ in range(100_000)])
    a = ys[:, 0] / 2.0  # y = a * x_center + z

    def dens_a(av):
        # integrate the (a, r) density over r: r^{k-2} with k = 3
        f = lambda r: r * math.exp(-(4 * (av - 1) ** 2 + r * r) / (4 * eta) - w * math.hypot(2 * av, r))  # noqa: E731
        return integrate.quad(f, 0, 6)[0]

    grid = np.linspace(0.0, 2.0, 801)
    d = np.array([dens_a(v) for v in grid])
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]
    ks = stats.kstest(a, lambda x: np.interp(x, grid, cdf)).statistic
    assert ks <= 0.02


def test_unknown_method(rng):
    with pytest.raises(ValueError):
        group_lasso_oracle_sample(np.ones(2), 0.1, 1.0, rng, method="nope")
