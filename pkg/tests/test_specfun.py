import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kvgreen import specfun
from kvgreen.errors import ConvergenceError, DomainError

mpmath.mp.dps = 40


def _i0e_ref(z):
    return float(mpmath.besseli(0, z) * mpmath.exp(-z))


@pytest.mark.parametrize("z", [0.0, 1e-8, 0.3, 1.0, 5.0, 19.99, 20.0, 20.01, 35.0, 120.0, 700.0, 1e5])
def test_scaled_i0_matches_mpmath(z):
    assert specfun.bessel_i0_scaled(z) == pytest.approx(_i0e_ref(z), rel=5e-15, abs=1e-300)


def test_scaled_i0_large_argument_finite():
    assert specfun.bessel_i0_scaled(700.0) == pytest.approx(_i0e_ref(700.0), rel=1e-14)
    assert math.isinf(specfun.bessel_i0(800.0))


def test_seam_is_continuous():
    zs = np.array([specfun.Z_SWITCH * (1 - 1e-12), specfun.Z_SWITCH * (1 + 1e-12)])
    got = specfun.bessel_i0_scaled(zs)
    for z, v in zip(zs, got):
        assert v == pytest.approx(_i0e_ref(z), rel=2e-15)


@pytest.mark.parametrize("z", [0.0, 2.5, 10.0, 30.0])
def test_unscaled_i0(z):
    assert specfun.bessel_i0(z) == pytest.approx(float(mpmath.besseli(0, z)), rel=1e-14)


def test_i0_rejects_bad_arguments():
    for bad in (-1.0, math.nan, math.inf):
        with pytest.raises(DomainError):
            specfun.bessel_i0_scaled(bad)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.0, 2000.0))
def test_scaled_i0_in_unit_interval_and_decreasing(z):
    v = specfun.bessel_i0_scaled(z)
    assert 0.0 < v <= 1.0
    assert specfun.bessel_i0_scaled(z + 0.5) <= v


@pytest.mark.parametrize("u,q", [(0.1, 0.1), (0.25, 0.5), (0.0, 0.9), (0.37, 0.99)])
def test_theta3_matches_mpmath(u, q):
    ref = float(mpmath.jtheta(3, mpmath.pi * u, q))
    assert specfun.theta3(u, q) == pytest.approx(ref, rel=1e-13)


def test_theta3_even_and_periodic():
    u = np.linspace(-1.3, 1.3, 27)
    q = 0.4
    assert np.allclose(specfun.theta3(u, q), specfun.theta3(-u, q), atol=1e-14)
    assert np.allclose(specfun.theta3(u, q), specfun.theta3(u + 1.0, q), atol=1e-13)


def test_theta3_small_nome_values():
    # 1 + 2 q cos(2 pi u) + 2 q^4 cos(4 pi u) + ...
    q = 1e-4
    assert specfun.theta3(0.0, q) == pytest.approx(1.0 + 2 * q + 2 * q**4, rel=1e-15)
    assert specfun.theta3(0.5, q) == pytest.approx(1.0 - 2 * q + 2 * q**4, rel=1e-15)


def test_theta3_rejects_bad_nome():
    for q in (0.0, 1.0, -0.2):
        with pytest.raises(DomainError):
            specfun.theta3(0.1, q)


def test_integrate_finite_and_semi_infinite():
    res = specfun.integrate_finite(math.sin, 0.0, math.pi)
    assert res.value == pytest.approx(2.0, rel=1e-12)
    gauss = specfun.integrate_semi_infinite(lambda x: math.exp(-x * x), 0.0, specfun.DEFAULT_QUADRATURE, lambda x: -x * x)
    assert gauss.value == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-12)


def test_integrate_finite_rejects_reversed_limits():
    with pytest.raises(DomainError):
        specfun.integrate_finite(math.sin, 1.0, 0.0)


def test_gauss_legendre_exact_for_polynomials():
    x, w = specfun.gauss_legendre(-1.0, 2.0, 5, panels=3)
    assert float(w @ x**9) == pytest.approx((2.0**10 - 1.0) / 10.0, rel=1e-13)


def test_integrate_vectorized_with_breakpoints():
    step = lambda x: np.where(x < 0.3, 1.0, 2.0)[:, None]  # noqa: E731
    res = specfun.integrate_vectorized(step, 0.0, 1.0, specfun.DEFAULT_QUADRATURE, breakpoints=[0.3])
    assert float(np.ravel(res.value)[0]) == pytest.approx(1.7, rel=1e-13)


def test_quadrature_spec_validation():
    with pytest.raises(ValueError):
        specfun.QuadratureSpec(abs_tol=0.0, rel_tol=0.0)
    with pytest.raises(ValueError):
        specfun.QuadratureSpec(max_subdivisions=0)


def test_convergence_error_carries_estimate():
    spec = specfun.QuadratureSpec(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=1)
    with pytest.raises(ConvergenceError) as info:
        specfun.integrate_finite(lambda x: math.sin(1.0 / x), 1e-6, 1.0, spec)
    assert info.value.estimate is not None


def test_theta3_direct_summation_values():
    assert specfun.theta3(0.0, 0.1) == pytest.approx(1.0 + 0.2 + 2e-4 + 2e-9, rel=1e-15)
    assert specfun.theta3(0.5, 0.1) == pytest.approx(1.0 - 0.2 + 2e-4 - 2e-9, rel=1e-15)
    assert specfun.theta3(0.3, 1e-300) == 1.0


def test_scaled_and_unscaled_i0_agree():
    z = np.linspace(0.0, 50.0, 1000)
    scaled = specfun.bessel_i0_scaled(z)
    assert np.all(scaled[1:] < 1.0)
    assert np.allclose(scaled * np.exp(z), specfun.bessel_i0(z), rtol=1e-12, atol=0)


def test_shifted_gaussian_half_line():
    res = specfun.integrate_semi_infinite(lambda v: math.exp(-4 * (v - 1) ** 2), 0.0, specfun.DEFAULT_QUADRATURE,
                                          lambda v: -4 * (v - 1) ** 2)
    assert res.value == pytest.approx(math.sqrt(math.pi) / 4 * (1 + math.erf(2.0)), rel=1e-12)


def test_sine_bessel_quadrature_example():
    f = lambda y: math.sin(2 * y) * specfun.bessel_i0(math.sqrt(max(y * (2 - y), 0.0)))  # noqa: E731
    want = 2 * math.sin(2.0) * math.sin(math.sqrt(3.0)) / math.sqrt(3.0)
    assert specfun.integrate_finite(f, 0.0, 2.0).value == pytest.approx(want, rel=1e-12)
