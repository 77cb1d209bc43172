import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import central_diff
from mfgp.errors import DimensionMismatch
from mfgp.kernel import (
    Kernel,
    KernelParams,
    kernel_eval,
    kernel_grad_matrix,
    kernel_grad_x,
    kernel_grad_xp,
    kernel_hess_cross,
    kernel_hess_matrix,
    kernel_matrix,
)

E_HALF = math.exp(-0.5)


def test_eval_at_zero_lag_is_variance():
    assert kernel_eval(Kernel.gaussian(2.0, [1.0]), 0.3, 0.3) == 2.0


def test_eval_examples():
    assert kernel_eval(Kernel.gaussian(1.0, [1.0]), 1.0, 0.0) == pytest.approx(0.606531, abs=1e-6)
    assert kernel_eval(Kernel.gaussian(1.0, [2.0, 2.0]), [1, 1], [0, 0]) == pytest.approx(0.778801, abs=1e-6)


def test_grad_examples():
    k = Kernel.gaussian(1.0, [1.0])
    assert kernel_grad_x(k, 1.0, 0.0)[0] == pytest.approx(-0.606531, abs=1e-6)
    assert kernel_grad_x(k, 0.0, 1.0)[0] == pytest.approx(0.606531, abs=1e-6)
    assert kernel_grad_xp(k, 1.0, 0.0)[0] == pytest.approx(0.606531, abs=1e-6)
    np.testing.assert_array_equal(kernel_grad_x(k, 0.4, 0.4), [0.0])
    np.testing.assert_array_equal(kernel_grad_xp(k, 0.4, 0.4), [0.0])


def test_hess_examples():
    np.testing.assert_allclose(kernel_hess_cross(Kernel.gaussian(1.0, [1.0]), 0.2, 0.2), [[1.0]])
    np.testing.assert_allclose(kernel_hess_cross(Kernel.gaussian(4.0, [2.0]), 0.2, 0.2), [[1.0]])
    H = kernel_hess_cross(Kernel.gaussian(1.0, [1.0, 1.0]), [0, 0], [1, 0])
    np.testing.assert_allclose(H, [[0.0, 0.0], [0.0, E_HALF]], atol=1e-15)


def test_grad_xp_is_exact_negation(rng):
    k = Kernel.gaussian(1.7, [0.4, 1.3])
    for _ in range(20):
        x, xp = rng.uniform(-2, 2, (2, 2))
        np.testing.assert_array_equal(kernel_grad_xp(k, x, xp), -kernel_grad_x(k, x, xp))


@pytest.mark.parametrize("d", [1, 2])
def test_derivatives_match_finite_differences(rng, d):
    for _ in range(100):
        k = Kernel.gaussian(rng.uniform(0.5, 3), rng.uniform(0.3, 2.0, d))
        x, xp = rng.uniform(-2, 2, (2, d))
        g = kernel_grad_x(k, x, xp)
        g_fd = central_diff(lambda z: kernel_eval(k, z, xp), x, 1e-5)
        np.testing.assert_allclose(g, g_fd, rtol=1e-5, atol=1e-8)

        H = kernel_hess_cross(k, x, xp)
        # d/dx'_j of the analytic d/dx_i, differentiated numerically
        H_fd = np.array([central_diff(lambda z: kernel_grad_x(k, x, z)[i], xp, 1e-5) for i in range(d)])
        np.testing.assert_allclose(H, H_fd, rtol=1e-4, atol=1e-8)


def test_nested_fd_hessian_from_values(rng):
    k = Kernel.gaussian(1.0, [0.7, 1.1])
    h = 1e-4
    for _ in range(10):
        x, xp = rng.uniform(-1, 1, (2, 2))
        H = kernel_hess_cross(k, x, xp)
        for i in range(2):
            for j in range(2):
                ei, ej = np.eye(2)[i] * h, np.eye(2)[j] * h
                fd = (
                    kernel_eval(k, x + ei, xp + ej)
                    - kernel_eval(k, x + ei, xp - ej)
                    - kernel_eval(k, x - ei, xp + ej)
                    + kernel_eval(k, x - ei, xp - ej)
                ) / (4 * h * h)
                assert fd == pytest.approx(H[i, j], rel=1e-4, abs=1e-6)


def test_matrix_routines_agree_with_scalar_ones(rng):
    k = Kernel.gaussian(2.0, [0.5, 0.9])
    A, B = rng.uniform(-1, 1, (4, 2)), rng.uniform(-1, 1, (3, 2))
    K, D, H = kernel_matrix(k, A, B), kernel_grad_matrix(k, A, B), kernel_hess_matrix(k, A, B)
    for i in range(4):
        for j in range(3):
            assert K[i, j] == kernel_eval(k, A[i], B[j])
            np.testing.assert_allclose(D[i, j], kernel_grad_x(k, A[i], B[j]), rtol=1e-14)
            np.testing.assert_allclose(H[i, j], kernel_hess_cross(k, A[i], B[j]), rtol=1e-14, atol=1e-16)


coords = st.floats(-2, 2, allow_nan=False)


@given(
    st.lists(coords, min_size=2, max_size=2),
    st.lists(coords, min_size=2, max_size=2),
    st.floats(0.1, 5),
    st.lists(st.floats(0.1, 3), min_size=2, max_size=2),
)
def test_symmetry_and_peak_bound(x, xp, var, lengths):
    k = Kernel.gaussian(var, lengths)
    a = kernel_eval(k, x, xp)
    assert a == kernel_eval(k, xp, x)
    assert 0 <= a <= var
    if np.allclose(x, xp, atol=0, rtol=0):
        assert a == var
    elif np.sum(((np.subtract(x, xp)) / lengths) ** 2) > 1e-12:
        assert a < var


@given(st.lists(coords, min_size=2, max_size=2), st.lists(st.floats(0.1, 3), min_size=2, max_size=2))
def test_hessian_symmetric_at_zero_lag(x, lengths):
    H = kernel_hess_cross(Kernel.gaussian(1.3, lengths), x, x)
    np.testing.assert_array_equal(H, H.T)
    np.testing.assert_allclose(np.diag(H), 1.3 / np.asarray(lengths) ** 2)


def test_validation():
    with pytest.raises(ValueError):
        KernelParams(0.0, (1.0,))
    with pytest.raises(ValueError):
        KernelParams(1.0, (1.0, -1.0))
    with pytest.raises(ValueError):
        KernelParams(1.0, ())
    with pytest.raises(ValueError):
        Kernel(KernelParams(1.0, (1.0,)), family="matern52")
    k = Kernel.gaussian(1.0, [1.0, 1.0])
    with pytest.raises(DimensionMismatch):
        kernel_eval(k, [0.0], [0.0, 1.0])
    with pytest.raises(DimensionMismatch):
        kernel_grad_x(k, [0.0, 0.0, 0.0], [0.0, 1.0, 2.0])
    with pytest.raises(DimensionMismatch):
        kernel_hess_cross(k, 0.0, 1.0)
