import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hyperpoisson.special import (
    CutComplex,
    bessel_i,
    bessel_ie,
    bessel_j,
    bessel_k,
    bessel_k_complex,
    bessel_ke,
    d_const,
    expansion_coefficient,
    k_scaled_expansion,
    m_s_coefficients,
    m_s_poly,
    orders,
)


def ascending_series(order, z, sign):
    """sum_k sign^k (z/2)^(2k+order) / (k! Gamma(k+order+1)), 60 terms."""
    terms = [
        sign**k * (z / 2) ** (2 * k + order) / (math.factorial(k) * math.gamma(k + order + 1))
        for k in range(60)
    ]
    return math.fsum(terms)


def k_integral(nu, z):
    """K_nu(z) = int_0^inf exp(-z cosh t) cosh(nu t) dt."""
    def f(t):
        return 0.5 * (math.exp(nu * t - z * math.cosh(t)) + math.exp(-nu * t - z * math.cosh(t)))

    top = math.acosh(800 / z + 1) + 1
    val, _ = integrate.quad(f, 0, top, epsabs=0, epsrel=1e-13, limit=200)
    return val


def test_orders_and_validation():
    assert orders(4) == (1.5, 0.5, 1.0)
    assert orders(3) == (1.0, 0.0, 0.5)
    for bad in (1, 0, 2.5):
        with pytest.raises(ValueError):
            orders(bad)


def test_j_against_series():
    assert bessel_j(1.5, 2.5) == pytest.approx(ascending_series(1.5, 2.5, -1), rel=1e-13)


@pytest.mark.parametrize("nu,z", [(0.5, 1.0), (2.0, 5.0), (1.0, 0.3), (3.5, 7.0)])
def test_i_against_series(nu, z):
    assert bessel_i(nu, z) == pytest.approx(ascending_series(nu, z, 1), rel=1e-13)
    assert bessel_ie(nu, z) == pytest.approx(math.exp(-z) * ascending_series(nu, z, 1), rel=1e-13)


def test_half_integer_closed_forms():
    assert bessel_i(0.5, 1.0) == pytest.approx(math.sqrt(2 / math.pi) * math.sinh(1.0), rel=1e-14)
    assert bessel_k(0.5, 2.0) == pytest.approx(math.sqrt(math.pi / 4) * math.exp(-2.0), rel=1e-14)
    assert bessel_k(0.5, 2.0) == pytest.approx(0.119938, abs=1e-6)
    assert bessel_i(0.5, 1.0) == pytest.approx(0.937674, abs=1e-6)


@pytest.mark.parametrize("nu,z", [(1.0, 0.5), (1.5, 1.0), (2.0, 5.0), (2.5, 30.0)])
def test_k_against_integral(nu, z):
    assert bessel_k(nu, z) == pytest.approx(k_integral(nu, z), rel=1e-11)
    assert bessel_ke(nu, z) == pytest.approx(math.exp(z) * k_integral(nu, z), rel=1e-11)


def test_overflow_and_domain():
    with pytest.raises(OverflowError):
        bessel_i(1.0, 1000.0)
    assert np.isfinite(bessel_ie(1.0, 1000.0))
    for fn in (bessel_i, bessel_k, bessel_ie, bessel_ke):
        with pytest.raises(ValueError):
            fn(1.0, 0.0)
    with pytest.raises(ValueError):
        bessel_j(0.0, -1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 6.0), st.floats(0.01, 60.0))
def test_wronskian(nu, z):
    # I_nu K_{nu+1} + I_{nu+1} K_nu = 1/z, in scaled form
    lhs = bessel_ie(nu, z) * bessel_ke(nu + 1, z) + bessel_ie(nu + 1, z) * bessel_ke(nu, z)
    assert lhs * z == pytest.approx(1.0, rel=1e-12)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0, 3.5])
def test_small_argument_laws(nu):
    z = 1e-6
    assert bessel_k(nu, z) / (math.gamma(nu) * 2 ** (nu - 1) * z**-nu) == pytest.approx(1, rel=1e-6)
    assert bessel_i(nu, z) / ((z / 2) ** nu / math.gamma(nu + 1)) == pytest.approx(1, rel=1e-6)


def test_m_s_named_polynomials():
    assert m_s_poly(0, 3.7) == pytest.approx(1.0, rel=1e-15)
    np.testing.assert_allclose(m_s_coefficients(1), [2, 2], rtol=1e-14)
    np.testing.assert_allclose(m_s_coefficients(2), [24, 24, 8], rtol=1e-14)
    assert m_s_poly(1, -1.0) == pytest.approx(0.0, abs=1e-14)
    assert m_s_poly(1, 1.0) == pytest.approx(4.0, rel=1e-15)
    assert m_s_poly(2, 0.0) == pytest.approx(24.0, rel=1e-15)
    with pytest.raises(ValueError):
        m_s_coefficients(1.5)


@pytest.mark.parametrize("s", [0, 1, 2, 3, 5])
@pytest.mark.parametrize("z", [0.1, 1.0, 4.0, 20.0])
def test_m_s_matches_bessel_form(s, z):
    n = 2 * s + 2
    nu = (n - 1) / 2
    expected = d_const(n) * z**nu * bessel_ke(nu, z)
    assert m_s_poly(s, z) == pytest.approx(expected, rel=1e-12)


def test_d_const_n4():
    assert d_const(4) == pytest.approx(math.pi**-0.5 * 2**1.5 * math.gamma(2), rel=1e-15)


def test_cut_limits_from_both_sides():
    above = bessel_k_complex(1.0, CutComplex(-2.0, 0.0, 1))
    expected = complex(math.cos(math.pi), -math.sin(math.pi)) * bessel_k(1.0, 2.0) - 1j * math.pi * bessel_i(1.0, 2.0)
    assert abs(above - expected) <= 1e-14 * abs(expected)
    below = bessel_k_complex(1.0, CutComplex(-2.0, 0.0, -1))
    assert abs(below - above.conjugate()) <= 1e-14 * abs(above)
    # signed zero picks the side for plain complex input
    assert bessel_k_complex(1.0, complex(-2.0, -0.0)) == pytest.approx(below, rel=1e-15)
    assert bessel_k_complex(1.0, complex(-2.0, 0.0)) == pytest.approx(above, rel=1e-15)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from([0.5, 1.0, 1.5, 2.0, 2.5]), st.floats(0.05, 20.0))
def test_cut_conjugation(nu, y):
    above = bessel_k_complex(nu, CutComplex(-y, 0.0, 1))
    below = bessel_k_complex(nu, CutComplex(-y, 0.0, -1))
    assert abs(below - above.conjugate()) <= 1e-13 * abs(above)


def test_cut_limit_continuous_with_interior():
    nu, y = 1.5, 1.3
    near = complex(mpmath.besselk(nu, mpmath.mpc(-y, 1e-30)))
    assert abs(bessel_k_complex(nu, CutComplex(-y, 0.0, 1)) - near) <= 1e-13 * abs(near)


@pytest.mark.parametrize("nu,z", [(2.0, -1 - 1j), (1.5, 0.3 + 2j), (2.5, -3 + 0.5j)])
def test_complex_k_against_mpmath(nu, z):
    expected = complex(mpmath.besselk(nu, z))
    assert abs(bessel_k_complex(nu, z) - expected) <= 1e-12 * abs(expected)


def test_cut_complex_validation():
    with pytest.raises(ValueError):
        CutComplex(1.0, 0.0, 0)
    with pytest.raises(ValueError):
        bessel_k_complex(1.0, CutComplex(0.0, 0.0))
    assert CutComplex.from_complex(complex(-1.0, -0.0)).side == -1


def test_expansion_coefficients():
    assert expansion_coefficient(4, 0) == pytest.approx(math.sqrt(math.pi / 2), rel=1e-15)
    assert k_scaled_expansion(1.5, 100.0, terms=1) == pytest.approx(math.sqrt(math.pi / 2) * 100, rel=1e-15)
    c1 = math.sqrt(math.pi / 2) * math.gamma(2.5) / math.gamma(0.5)
    assert expansion_coefficient(3, 1) == pytest.approx(c1, rel=1e-15)
    with pytest.raises(ValueError):
        k_scaled_expansion(1.0, 0.5)


def test_expansion_exact_for_n4():
    # K_{3/2} is elementary: e^z z^{3/2} K_{3/2}(z) = sqrt(pi/2) (z + 1)
    zs = np.geomspace(1, 100, 9)
    np.testing.assert_allclose(k_scaled_expansion(1.5, zs), math.sqrt(math.pi / 2) * (zs + 1), rtol=1e-14)


@pytest.mark.parametrize("nu", [1.0, 2.0, 2.5, 3.0])
def test_expansion_error_band(nu):
    # |e^z z^nu K_nu - expansion| / z^(nu-1/2) <= C / z^2 with a single C on [10, 100]
    zs = np.geomspace(10, 100, 12)
    exact = np.array([float(mpmath.besselk(nu, z) * mpmath.e**z * z**nu) for z in zs])
    dev = np.abs(exact - k_scaled_expansion(nu, zs)) / zs ** (nu - 0.5)
    c = dev * zs**2
    assert c.max() < 2 * c.min() + 1e-12


@pytest.mark.parametrize("n", [3, 4, 5, 7, 8])
@pytest.mark.parametrize("z", [0.1, 1.0, 5.0, 20.0])
def test_k_against_laguerre_integral(n, z):
    # d_n e^z z^nu K_nu(z) = int_0^inf e^{-u} u^s (u + 2z)^s du, any integer n >= 3
    s, nu = n / 2 - 1, (n - 1) / 2
    val, _ = integrate.quad(lambda u: math.exp(-u) * u**s * (u + 2 * z) ** s, 0, np.inf, epsabs=0, epsrel=1e-13)
    assert bessel_ke(nu, z) == pytest.approx(val / (d_const(n) * z**nu), rel=1e-10)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.0, 3.5])
def test_wronskian_lower_pair(nu):
    u = np.geomspace(0.1, 50, 40)
    lhs = bessel_ie(nu - 1, u) * bessel_ke(nu, u) + bessel_ie(nu, u) * bessel_ke(nu - 1, u)
    np.testing.assert_allclose(lhs * u, 1.0, rtol=1e-10)


@pytest.mark.parametrize("nu", [0.5, 1.0, 1.5, 2.5, 4.0])
def test_i_over_k_increasing(nu):
    u = np.geomspace(1e-3, 300, 200)
    ratio = bessel_ie(nu, u) / bessel_ke(nu, u)  # scaled ratio, times e^{-2u}
    assert np.all(np.diff(np.log(ratio) + 2 * u) > 0)
