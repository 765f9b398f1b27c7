import math

import numpy as np
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from proxmh.core import GroupLasso, SamplerConfig, ScaledL1, regularizer_value
from proxmh.diagnostics import histogram_tv
from proxmh.oracles import L1Oracle, ZeroOracle, laplace_oracle_mixture, prox_map
from proxmh.oracles.group_lasso import group_log_partition
from proxmh.oracles.laplace import laplace_log_partition
from proxmh.oracles.quadrature import Quadrature1DConfig, quadrature_1d
from proxmh.sampler import log_accept_ratio, make_state, step
from proxmh.targets import gaussian_l1, standard_gaussian

reals = st.floats(-5, 5, allow_nan=False)
etas = st.floats(1e-3, 1.0)
lams = st.floats(0.05, 4.0)
vectors = arrays(np.float64, st.integers(1, 4), elements=reals)


@given(reals, etas, lams)
def test_mixture_weights_sum_to_one(u, eta, lam):
    wp, wm, tp, tm = laplace_oracle_mixture(u, eta, lam)
    assert 0.0 <= wp <= 1.0 and 0.0 <= wm <= 1.0
    assert abs(wp + wm - 1.0) <= 1e-12
    assert tp.lower == 0.0 and tm.upper == 0.0
    assert math.isclose(tp.variance, 2 * eta) and math.isclose(tm.variance, 2 * eta)


@given(reals, etas, lams)
def test_laplace_log_partition_matches_quadrature(u, eta, lam):
    ref = quadrature_1d(lambda y: -(y - u) ** 2 / (4 * eta) - lam * np.abs(y),
                        Quadrature1DConfig(center=u, scale=math.sqrt(2 * eta), breakpoints=(0.0,)))[0]
    got = laplace_log_partition(np.array([u]), eta, lam)
    assert abs(got - ref) <= 1e-8 * max(1.0, abs(ref))


@given(reals, etas, lams)
def test_laplace_symmetry(u, eta, lam):
    a = laplace_log_partition(np.array([u]), eta, lam)
    b = laplace_log_partition(np.array([-u]), eta, lam)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


@given(reals, etas)
def test_log_partition_decreases_with_lambda(u, eta):
    vals = [laplace_log_partition(np.array([u]), eta, lam) for lam in (0.1, 0.5, 2.0)]
    assert vals[0] > vals[1] > vals[2]
    assert vals[0] < ZeroOracle().log_partition(np.array([u]), eta)


@given(vectors, etas, lams)
def test_soft_threshold_is_prox(x, eta, lam):
    p = prox_map(ScaledL1(lam), x, eta)
    obj = lambda y: float((y - x) @ (y - x)) / (2 * eta) + lam * float(np.abs(y).sum())  # noqa: E731
    rng = np.random.default_rng(0)
    for _ in range(5):
        assert obj(p) <= obj(p + 1e-3 * rng.standard_normal(x.shape)) + 1e-12
    assert np.all(np.abs(p) <= np.abs(x))


@given(arrays(np.float64, 4, elements=reals), etas)
def test_group_prox_nonexpansive(x, eta):
    spec = GroupLasso(((0, 1), (2, 3)), (1.0, 0.5))
    y = x + 0.3
    px, py = prox_map(spec, x, eta), prox_map(spec, y, eta)
    assert np.linalg.norm(px - py) <= np.linalg.norm(x - y) + 1e-12
    assert regularizer_value(spec, px) <= regularizer_value(spec, x) + 1e-12


@given(arrays(np.float64, 3, elements=reals), etas, st.floats(0.1, 3.0))
def test_group_log_partition_rotation_invariant(u, eta, w):
    q = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 3)))[0]
    a = group_log_partition(u, eta, w)
    b = group_log_partition(q @ u, eta, w)
    assert math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)


@given(arrays(np.float64, 2, elements=reals), etas, st.floats(0.1, 3.0))
def test_group_log_partition_below_gaussian(u, eta, w):
    assert group_log_partition(u, eta, w) < ZeroOracle().log_partition(u, eta)


@given(vectors, etas)
def test_accept_ratio_at_identity_is_zero(x, eta):
    tg = gaussian_l1(x.size, 1.0)
    assert log_accept_ratio(tg, L1Oracle(ScaledL1(1.0)), x, x, eta) == 0.0


@given(vectors, vectors, etas)
def test_accept_ratio_nonpositive(x, z, eta):
    if x.size != z.size:
        z = np.resize(z, x.size)
    tg = gaussian_l1(x.size, 1.0)
    assert log_accept_ratio(tg, L1Oracle(ScaledL1(1.0)), x, z, eta) <= 0.0


@given(st.integers(0, 2**32 - 1), arrays(np.float64, 2, elements=reals))
def test_step_outcome_invariant(seed, x):
    tg = standard_gaussian(2)
    cfg = SamplerConfig(eta=0.1, n_steps=1, lazy=True)
    state = make_state(tg, ZeroOracle(), x, 0.1)
    out = step(tg, ZeroOracle(), state, cfg, np.random.default_rng(seed))
    if out.was_lazy_hold:
        assert np.array_equal(out.next.x, x) and not out.accepted
    elif out.accepted:
        assert np.array_equal(out.next.x, out.proposed)
    else:
        assert np.array_equal(out.next.x, x)
    assert out.log_accept_prob <= 0.0


@given(st.lists(st.floats(0, 1), min_size=3, max_size=10), st.lists(st.floats(0, 1), min_size=3, max_size=10))
def test_histogram_tv_bounds(a, b):
    n = min(len(a), len(b))
    p, q = np.array(a[:n]) + 1e-3, np.array(b[:n]) + 1e-3
    p, q = p / p.sum(), q / q.sum()
    tv = histogram_tv(p, q)
    assert 0.0 <= tv <= 1.0
    assert tv == histogram_tv(q, p)
    assert histogram_tv(p, p) == 0.0
