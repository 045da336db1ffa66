import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nonloc_mt.quadrature import (adaptive_gk, extrapolate_to_zero, fit_to_zero, gauss_legendre,
                                  integrate_half_line, lagrange_weights_at_zero)


@pytest.mark.parametrize("n", [2, 5, 10])
def test_gauss_legendre_exact_for_polynomials(n):
    x, w = gauss_legendre(n)
    for k in range(2 * n):
        exact = 0.0 if k % 2 else 2.0 / (k + 1)
        assert np.dot(w, x ** k) == pytest.approx(exact, abs=1e-13)


def test_adaptive_gk_smooth_and_kinked():
    r = adaptive_gk(np.sin, [0.0, math.pi])
    assert r.value == pytest.approx(2.0, rel=1e-13)
    r = adaptive_gk(lambda x: np.abs(x - 0.3), [0.0, 0.3, 1.0])
    assert r.value == pytest.approx(0.045 + 0.245, rel=1e-13)


def test_adaptive_gk_endpoint_singularity():
    # int_0^1 x^{-1/2} = 2; refinement converges toward the integrable singularity
    r = adaptive_gk(lambda x: x ** -0.5, [0.0, 1.0], abs_tol=1e-9, rel_tol=1e-9)
    assert r.value == pytest.approx(2.0, rel=1e-6)


def test_adaptive_gk_reports_inf():
    r = adaptive_gk(lambda x: np.where(x > 0.5, np.inf, 1.0), [0.0, 1.0])
    assert math.isinf(r.value)


def test_half_line():
    r = integrate_half_line(lambda x: np.exp(-x), 1.0)
    assert r.value == pytest.approx(math.exp(-1.0), rel=1e-10)


@given(st.lists(st.floats(-5, 5), min_size=1, max_size=4))
def test_extrapolation_exact_on_polynomials(coefs):
    h = np.array([0.4, 0.2, 0.1, 0.05])
    vals = np.polyval(coefs[::-1], h)
    limit, _ = extrapolate_to_zero(h, vals)
    assert limit == pytest.approx(coefs[0], abs=1e-9)


def test_lagrange_weights_sum_to_one():
    assert lagrange_weights_at_zero([0.3, 0.2, 0.1]).sum() == pytest.approx(1.0)


def test_fit_to_zero_recovers_intercept_and_stderr():
    h = np.linspace(0.05, 0.5, 8)
    limit, sigma = fit_to_zero(h, 2.0 + 3.0 * h, np.full(8, 0.01), degree=1)
    assert limit == pytest.approx(2.0, abs=1e-12)
    assert 0 < sigma < 0.05


def test_fit_to_zero_zero_sigmas():
    limit, sigma = fit_to_zero([0.1, 0.2, 0.3], [1.0, 1.1, 1.2], [0.0, 0.0, 0.0])
    assert limit == pytest.approx(0.9) and sigma == 0.0
