import numpy as np
import pytest

from proxmh.core import Custom, GroupLasso, ScaledL1, SeparableGeneric, Zero, regularizer_value
from proxmh.errors import UnsupportedOperationError
from proxmh.oracles import moreau_envelope, prox_map, soft_threshold


def test_soft_threshold_examples():
    assert prox_map(ScaledL1(1.0), np.array([3.0]), 1.0) == pytest.approx([2.0])
    assert prox_map(ScaledL1(1.0), np.array([0.5]), 1.0) == pytest.approx([0.0])
    assert prox_map(ScaledL1(1.0), np.array([-3.0]), 0.5) == pytest.approx([-2.5])


def test_group_shrink_example():
    assert prox_map(GroupLasso(((0, 1),)), np.array([3.0, 4.0]), 1.0) == pytest.approx([2.4, 3.2])


def test_group_inside_threshold_is_zero():
    out = prox_map(GroupLasso(((0, 1), (2,)), (10.0, 0.1)), np.array([3.0, 4.0, 1.0]), 1.0)
    assert out == pytest.approx([0.0, 0.0, 0.9])


def test_zero_is_identity():
    x = np.array([1.0, -2.0])
    assert np.array_equal(prox_map(Zero(), x, 0.3), x)


def test_separable_golden_search_matches_soft_threshold(rng):
    x = rng.uniform(-3, 3, 10)
    spec = SeparableGeneric((np.abs,) * 10, (1.0,) * 10)
    assert prox_map(spec, x, 0.7) == pytest.approx(soft_threshold(x, 0.7), abs=1e-7)


def test_separable_user_prox_is_used():
    spec = SeparableGeneric((np.abs,), (1.0,), proxes=(lambda t, eta: 42.0,))
    assert prox_map(spec, np.array([0.0]), 1.0) == pytest.approx([42.0])


def test_separable_pseudo_huber_optimality(rng):
    g = lambda t: np.sqrt(1 + t * t) - 1  # noqa: E731
    spec = SeparableGeneric((g,), (1.0,))
    for xi in rng.uniform(-4, 4, 5):
        p = prox_map(spec, np.array([xi]), 0.5)[0]
        # first-order condition: (p - x)/eta + g'(p) = 0
        assert (p - xi) / 0.5 + p / np.sqrt(1 + p * p) == pytest.approx(0.0, abs=1e-6)


def test_custom_prox():
    spec = Custom(g=lambda x: float(np.abs(x).sum()), lipschitz=1.0,
                  prox=lambda x, eta: soft_threshold(x, eta))
    assert prox_map(spec, np.array([2.0]), 0.5) == pytest.approx([1.5])


def test_custom_without_prox_raises():
    spec = Custom(g=lambda x: 0.0, lipschitz=0.0)
    with pytest.raises(UnsupportedOperationError):
        prox_map(spec, np.zeros(2), 1.0)


def test_moreau_envelope_l1_is_huber(rng):
    eta = 0.4
    for t in rng.uniform(-2, 2, 20):
        val, grad = moreau_envelope(ScaledL1(1.0), np.array([t]), eta)
        huber = t * t / (2 * eta) if abs(t) <= eta else abs(t) - eta / 2
        assert val == pytest.approx(huber, abs=1e-12)
        assert grad[0] == pytest.approx(np.clip(t / eta, -1, 1), abs=1e-12)


def test_moreau_envelope_below_g(rng):
    spec = GroupLasso(((0, 1), (2,)), (1.0, 2.0))
    for _ in range(20):
        x = rng.normal(size=3) * 2
        val, grad = moreau_envelope(spec, x, 0.3)
        assert val <= regularizer_value(spec, x) + 1e-12
        assert np.linalg.norm(grad[:2]) <= 1.0 + 1e-12
