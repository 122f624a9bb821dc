import numpy as np
import pytest

from conftest import random_unit
from tenseig.errors import ZeroIterate
from tenseig.models import identity_tensor, random_gaussian_symmetric, t_omega
from tenseig.power import PowerConfig, adaptive_shift, hopm_step, run_power, shifted_hopm_step
from tenseig.spectral import classify
from tenseig.tensor import SymmetricTensor, contract_to_matrix, hessian

PAIR = np.array([2.0, 1.0, 1.0]) / np.sqrt(6)  # eigenvector of T_0.125, lambda = sqrt(1.5)


def test_hopm_fixed_point():
    np.testing.assert_allclose(hopm_step(t_omega(3, 0.125), PAIR), PAIR, atol=1e-12)


def test_hopm_identity_cubic_squares_components():
    x = np.array([0.8, 0.6, 0.0])
    expected = x**2 / np.linalg.norm(x**2)
    out = hopm_step(identity_tensor(3, 3), x)
    np.testing.assert_allclose(out, expected, atol=1e-15)
    np.testing.assert_allclose(out, [0.8716, 0.4902, 0.0], atol=1e-4)


def test_hopm_zero_tensor():
    with pytest.raises(ZeroIterate):
        hopm_step(SymmetricTensor(np.zeros((3, 3, 3))), np.array([1.0, 0.0, 0.0]))


def test_shift_zero_is_plain(rng):
    T = random_gaussian_symmetric(4, 4, 3)
    x = random_unit(rng, 4)
    np.testing.assert_array_equal(shifted_hopm_step(T, x, 0.0), hopm_step(T, x))


def test_shifted_fixed_point():
    np.testing.assert_allclose(shifted_hopm_step(t_omega(3, 0.125), PAIR, 2.0), PAIR, atol=1e-12)


def test_large_shift_keeps_direction(rng):
    T = random_gaussian_symmetric(3, 5, 8)
    x = random_unit(rng, 5)
    y = shifted_hopm_step(T, x, 1e6)
    assert np.arccos(min(1.0, x @ y)) <= 1e-5


def test_fixed_points_are_eigenvectors(rng):
    T = random_gaussian_symmetric(3, 4, 12)
    for _ in range(10):
        x = random_unit(rng, 4)
        assert np.linalg.norm(shifted_hopm_step(T, x, 1.0) - x) > 1e-8


def test_adaptive_shift_zero_when_already_convex():
    T = identity_tensor(4, 3)
    x = np.ones(3) / np.sqrt(3)  # H = 2/3 I, curvature 12/3 I
    assert adaptive_shift(T, x, 1e-6, "max") == 0.0
    assert adaptive_shift(T, x, 1e-6, "max", form="curvature") == 0.0


def test_adaptive_shift_identity_cubic_e1():
    e1 = np.array([1.0, 0.0, 0.0])
    assert adaptive_shift(identity_tensor(3, 3), e1, 1e-6, "max") == pytest.approx((1e-6 + 1) / 3, rel=1e-12)
    # curvature form: 6 diag(1, 0, 0) has smallest eigenvalue 0
    assert adaptive_shift(identity_tensor(3, 3), e1, 1e-6, "max", form="curvature") == pytest.approx(1e-6 / 3)


@pytest.mark.parametrize("direction", ["max", "min"])
def test_adaptive_shift_margin(direction, rng):
    tau = 1e-6
    sign = 1 if direction == "max" else -1
    for k in range(30):
        T = random_gaussian_symmetric(3 + k % 3, 4, k)
        m = T.order
        x = random_unit(rng, 4)
        a = adaptive_shift(T, x, tau, direction)
        w = np.linalg.eigvalsh(sign * (hessian(T, x) + m * a * np.eye(4)))
        assert w[0] >= tau * (1 - 1e-8)
        a = adaptive_shift(T, x, tau, direction, form="curvature")
        shifted = m * (m - 1) * contract_to_matrix(T, x) + a * m * (np.eye(4) + (m - 2) * np.outer(x, x))
        assert np.linalg.eigvalsh(sign * shifted)[0] >= tau * (1 - 1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        PowerConfig("other")
    with pytest.raises(ValueError):
        PowerConfig(delta=0.0)
    with pytest.raises(ValueError):
        PowerConfig(kmax=0)
    with pytest.raises(ValueError):
        PowerConfig(tau=-1.0)


def test_start_at_attracting_eigenvector(backend):
    T = t_omega(3, 0.125)
    x = np.ones(3) / np.sqrt(3)  # negative-stable, lambda > 0: attracting for plain HOPM
    out = run_power(T, x, PowerConfig("plain"), backend)
    assert out.converged and out.iterations <= 2


def test_zero_tensor_is_a_failure_not_a_crash(backend):
    out = run_power(SymmetricTensor(np.zeros((3, 3, 3))), np.array([1.0, 0.0, 0.0]), PowerConfig("plain"), backend)
    assert out.status == "step-failure"


@pytest.mark.parametrize("direction", ["max", "min"])
def test_adaptive_runs_are_monotone_and_avoid_unstable_pairs(direction, backend, rng):
    T = random_gaussian_symmetric(4, 4, 2024)
    cfg = PowerConfig("adaptive", direction=direction, trace=True, kmax=1000)
    starts = 40 if backend == "compiled" else 8
    for _ in range(starts):
        out = run_power(T, random_unit(rng, 4), cfg, backend)
        d = np.diff(out.mu_trace)
        if direction == "max":
            assert d.min() >= -1e-12
        else:
            assert d.max() <= 1e-12
        np.testing.assert_allclose(np.linalg.norm(out.trace, axis=1), 1.0, atol=1e-12)
        if out.converged:
            assert classify(T, out.x).power_class != "power-unstable"


def test_fixed_shift_converges(backend):
    T = random_gaussian_symmetric(3, 3, 5)
    out = run_power(T, np.ones(3) / np.sqrt(3), PowerConfig("fixed", alpha=10.0, kmax=2000), backend)
    assert out.converged and out.residual <= 1e-8
