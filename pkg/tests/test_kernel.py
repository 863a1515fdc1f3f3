import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kernseg.kernel import (
    Kernel,
    KernelFamily,
    RankDeficientError,
    default_tol_res,
    eval_interpolant,
    fit_interpolant,
    gram_matrix,
    kernel_value,
    native_norm,
)

IMQ = Kernel(KernelFamily.IMQ, 0.35)
GAUSS = Kernel(KernelFamily.GAUSSIAN, 1.0)


def test_kernel_values():
    assert kernel_value(IMQ, 0.0) == 1.0
    assert kernel_value(IMQ, 0.35) == pytest.approx(1 / math.sqrt(3), rel=1e-15)
    assert kernel_value(GAUSS, 1.0) == pytest.approx(math.exp(-1), rel=1e-15)


def test_negative_radius_rejected():
    with pytest.raises(ValueError):
        kernel_value(IMQ, -0.1)


def test_bad_delta_rejected():
    with pytest.raises(ValueError):
        Kernel("imq", 0.0)


@pytest.mark.parametrize("k", [IMQ, GAUSS, Kernel("gaussian", 0.2)])
def test_strictly_decreasing(k):
    r = np.sort(np.random.default_rng(0).uniform(0, 1.5, 200))
    v = k.phi(r)
    assert np.all(np.diff(v) < 0)


def test_gram_single_point():
    np.testing.assert_array_equal(gram_matrix(IMQ, [[0.2, 0.3]]), [[1.0]])


def test_gram_near_coincident():
    a = gram_matrix(IMQ, [[0.2, 0.3], [0.2 + 1e-9, 0.3]])
    assert a[0, 1] == pytest.approx(1.0, abs=1e-15)
    assert np.linalg.cond(a) > 1e12


def test_gram_random_matches_elementwise():
    x = np.random.default_rng(1).random((20, 2))
    a = gram_matrix(IMQ, x)
    for i in range(20):
        for j in range(20):
            r = math.dist(x[i], x[j])
            assert a[i, j] == pytest.approx((1 + 2 * r * r / 0.35**2) ** -0.5, rel=1e-13)
    np.testing.assert_array_equal(a, a.T)
    assert np.linalg.eigvalsh(a).min() > 0


def test_single_point_fit():
    x = np.array([[0.4, 0.4]])
    s = fit_interpolant(IMQ, x, [3.0])
    assert native_norm(s) == pytest.approx(3.0)
    np.testing.assert_allclose(s.standard_coeffs, [3.0])
    assert eval_interpolant(s, [0.4 + 0.35, 0.4]) == pytest.approx(3 / math.sqrt(3), rel=1e-14)


def test_zero_data():
    x = np.random.default_rng(2).random((8, 2))
    s = fit_interpolant(IMQ, x, np.zeros(8))
    assert native_norm(s) == 0.0
    assert not np.any(s.standard_coeffs)


def test_two_point_closed_form():
    x = np.array([[0.1, 0.2], [0.3, 0.25]])
    f = np.array([1.3, -0.4])
    a = (1 + 2 * math.dist(x[0], x[1]) ** 2 / 0.35**2) ** -0.5
    # inverse of [[1, a], [a, 1]]
    c = np.array([f[0] - a * f[1], f[1] - a * f[0]]) / (1 - a * a)
    s = fit_interpolant(IMQ, x, f)
    got = np.empty(2)
    got[s.pivot_order] = s.standard_coeffs
    np.testing.assert_allclose(got, c, rtol=1e-12)
    assert native_norm(s) == pytest.approx(math.sqrt(c @ np.array([[1, a], [a, 1]]) @ c), rel=1e-12)


def test_reproduces_data_at_centers():
    rng = np.random.default_rng(5)
    x = rng.random((30, 2))
    f = np.sin(3 * x[:, 0]) + x[:, 1]
    s = fit_interpolant(IMQ, x, f)
    assert np.abs(s(x) - f).max() <= default_tol_res(f)
    assert s.residual <= default_tol_res(f)


def test_newton_and_standard_forms_agree():
    rng = np.random.default_rng(9)
    x = rng.random((15, 2))
    s = fit_interpolant(IMQ, x, rng.standard_normal(15))
    p = rng.uniform(-0.2, 1.2, (50, 2))
    a, b = s(p), s.eval_standard(p)
    np.testing.assert_allclose(a, b, rtol=1e-10, atol=1e-10 * np.abs(a).max())


def test_native_norm_equals_quadratic_form():
    rng = np.random.default_rng(4)
    x = rng.random((10, 2))
    s = fit_interpolant(IMQ, x, rng.standard_normal(10))
    c = s.standard_coeffs
    q = math.sqrt(c @ gram_matrix(IMQ, s.centers) @ c)
    assert abs(q - native_norm(s)) <= 1e-8 * native_norm(s)


def test_dependent_center_dropped():
    x = np.array([[0.0, 0.0], [1e-9, 0.0], [0.5, 0.5]])
    s = fit_interpolant(IMQ, x, [1.0, 1.0, 2.0])
    assert s.n_dropped == 1
    assert abs(s([[0.5, 0.5]])[0] - 2.0) < 1e-10


def test_all_pivots_below_tolerance():
    with pytest.raises(RankDeficientError, match="pivot 1"):
        fit_interpolant(IMQ, [[0.0, 0.0], [1.0, 1.0]], [1.0, 2.0], tol_piv=2.0)


def test_gaussian_fit_interpolates():
    x = np.random.default_rng(6).random((12, 2))
    f = x[:, 0] ** 2
    s = fit_interpolant(Kernel("gaussian", 0.3), x, f)
    assert np.abs(s(x) - f).max() <= default_tol_res(f)


points = st.integers(0, 2**31 - 1).map(lambda seed: np.random.default_rng(seed))


@settings(max_examples=40, deadline=None)
@given(points, st.integers(2, 40), st.floats(-5, 5).filter(lambda a: abs(a) > 1e-3))
def test_norm_scales_with_data(rng, n, alpha):
    x = rng.random((n, 2))
    f = rng.standard_normal(n)
    s1 = fit_interpolant(IMQ, x, f)
    s2 = fit_interpolant(IMQ, x, alpha * f)
    assert native_norm(s2) == pytest.approx(abs(alpha) * native_norm(s1), rel=1e-9)


@settings(max_examples=40, deadline=None)
@given(points, st.integers(2, 30), st.integers(1, 15))
def test_norm_monotone_under_extension(rng, n, extra):
    x = rng.random((n + extra, 2))
    f = np.cos(2 * x[:, 0]) * x[:, 1]
    small = native_norm(fit_interpolant(IMQ, x[:n], f[:n]))
    big = native_norm(fit_interpolant(IMQ, x, f))
    assert big >= small * (1 - 1e-10)
