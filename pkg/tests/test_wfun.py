import math

import numpy as np
import pytest
from scipy import integrate

from hyperpoisson.special import m_s_poly
from hyperpoisson.wfun import (
    Geometry,
    QPolynomial,
    f_lambda,
    residue_at,
    residue_at_even,
    w,
    w1,
    w2,
    w_boundary,
    w_evaluator,
    w_moment,
)
from hyperpoisson.zeros import find_zeros

GEOMETRIES = [(1.0, 1.5), (1.0, 2.0), (0.5, 3.0)]
SQ3 = math.sqrt(3)


def test_geometry_validation():
    g = Geometry(5, 1.0, 3.0)
    assert (g.lam, g.ratio, g.nu, g.s) == (2.0, 3.0, 2.0, 1.5)
    assert g.scaled(2.0) == Geometry(5, 2.0, 6.0)
    for args in [(5, 1.0, 1.0), (5, 2.0, 1.0), (5, 0.0, 1.0), (1, 1.0, 2.0), (4.5, 1.0, 2.0)]:
        with pytest.raises(ValueError):
            Geometry(*args)


def test_q_polynomial():
    g = Geometry(4, 1.0, 2.0)
    q = QPolynomial.for_geometry(g)
    assert q(1.0) == pytest.approx(0.5, rel=1e-15)


@pytest.mark.parametrize("n", [3, 4, 5, 6, 7])
@pytest.mark.parametrize("a,x", GEOMETRIES)
def test_f_at_zero(n, a, x):
    g = Geometry(n, a, x)
    s = g.s
    assert g.lam * f_lambda(g, 0.0) == pytest.approx(s * (s + 1) * (x / a) ** s * g.lam / (2 * x * a), rel=1e-14)
    # the Taylor branch joins the Bessel formula continuously
    assert f_lambda(g, 1.5e-8) == pytest.approx(f_lambda(g, 0.5e-8), rel=1e-7)


def test_f_n4_polynomial_form():
    g = Geometry(4, 1.0, 2.0)
    q = QPolynomial.for_geometry(g)
    r = 1.0
    lhs = g.lam * f_lambda(g, g.a * r)
    rhs = (r * m_s_poly(1, r * g.x) - (g.x / g.a) * q(r) * m_s_poly(1, r * g.a)) / m_s_poly(1, r * g.a)
    assert lhs == pytest.approx(rhs, rel=1e-14)
    assert lhs == pytest.approx(0.5, rel=1e-14)


@pytest.mark.parametrize("n", [3, 4, 6, 9])
def test_f_decays_like_inverse_z(n):
    g = Geometry(n, 1.0, 2.0)
    zf = [z * f_lambda(g, z) for z in (50.0, 100.0, 200.0)]
    assert max(abs(v) for v in zf) < 2 * abs(zf[0]) + 1e-12
    assert abs(zf[2] - zf[1]) < abs(zf[1] - zf[0]) + 1e-12


def test_f_rejects_negative():
    with pytest.raises(ValueError):
        f_lambda(Geometry(4, 1.0, 2.0), -1.0)


@pytest.mark.parametrize("n", [4, 6, 8, 10])
@pytest.mark.parametrize("a,x", GEOMETRIES)
def test_residue_routes_agree(n, a, x):
    g = Geometry(n, a, x)
    for z in find_zeros(n):
        assert residue_at(g, z) == pytest.approx(residue_at_even(g, z), rel=1e-11)


def test_residue_n6_named():
    g = Geometry(6, 1.0, 2.5)
    z1 = complex(-1.5, SQ3 / 2)
    expected = 1.5 * complex(2 * g.lam + 1, -SQ3)
    assert residue_at(g, z1) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("n", [4, 5, 6, 7])
def test_residue_boundary_limit(n):
    a = 1.3
    g = Geometry(n, a, a * (1 + 1e-8))
    for z in find_zeros(n):
        assert residue_at(g, z) == pytest.approx((z / a) ** 2, rel=1e-6)


def test_residue_even_rejects_odd():
    with pytest.raises(ValueError):
        residue_at_even(Geometry(5, 1.0, 2.0), -1.0)


@pytest.mark.parametrize("a,x", GEOMETRIES + [(2.0, 3.0)])
def test_w_n4_exponential(a, x):
    g = Geometry(4, a, x)
    v = np.array([0.0, 0.3, 1.0, 5.0, 40.0])
    np.testing.assert_allclose(w(g, v), np.exp(-v) / a**2, rtol=1e-13, atol=0)


@pytest.mark.parametrize("x", [1.5, 2.0, 4.0])
def test_w_n6_closed_form(x):
    g = Geometry(6, 1.0, x)
    v = np.linspace(0, 12, 25)
    lam = g.lam
    expected = 3 * np.exp(-1.5 * v) * ((2 * lam + 1) * np.cos(SQ3 * v / 2) + SQ3 * np.sin(SQ3 * v / 2))
    np.testing.assert_allclose(w(g, v), expected, rtol=1e-12, atol=1e-14 * abs(expected).max())


def test_w_n3_has_no_residue_part():
    g = Geometry(3, 1.0, 1.5)
    assert np.all(w1(g, np.linspace(0, 5, 11)) == 0)
    assert np.all(w(g, np.linspace(0.1, 5, 11)) > 0)


def test_w2_even_raises():
    with pytest.raises(ValueError):
        w2(Geometry(4, 1.0, 2.0), 1.0)


@pytest.mark.parametrize("n", [3, 5, 7, 9])
@pytest.mark.parametrize("a,x", GEOMETRIES)
def test_w2_sign(n, a, x):
    g = Geometry(n, a, x)
    v = np.geomspace(1e-6, 1e6, 60)
    sign = (-1) ** (int(g.nu) + 1)
    assert np.all(sign * w2(g, v) >= 0)


def test_w_n5_real_valued():
    g = Geometry(5, 1.0, 2.0)
    out = w(g, np.linspace(0, 10, 21))
    assert out.dtype == np.float64
    assert np.all(np.isfinite(out))


def tail_constant(g):
    n, nu = g.n, g.nu
    return ((-1) ** (int(nu) + 1) * math.factorial(n) / (2 ** (n - 2) * math.gamma(nu) * math.gamma(nu + 1))
            * (g.ratio ** (n - 1) - 1) / (g.lam * g.a))


def test_w2_tail_law_n3():
    g = Geometry(3, 1.0, 1.5)
    c = tail_constant(g)
    assert c == pytest.approx(7.5)
    # v^4 w2 approaches the constant slowly (relative gap ~ 1/v)
    rel = [abs(v**4 * w2(g, v) / c - 1) for v in (50.0, 100.0, 1e5)]
    assert rel[0] < 0.03 and rel[1] < 0.015 and rel[2] < 1e-3
    assert rel[0] > rel[1] > rel[2]


def test_w2_tail_law_n5_sign():
    g = Geometry(5, 1.0, 2.0)
    c = tail_constant(g)
    assert c < 0
    assert 1e5**6 * w2(g, 1e5) / c == pytest.approx(1, rel=1e-3)


@pytest.mark.parametrize("n", [3, 5, 6])
def test_boundary_limit_of_w(n):
    a = 0.7
    g = Geometry(n, a, a * (1 + 1e-7))
    v = np.array([0.05, 0.5, 2.0, 8.0])
    np.testing.assert_allclose(w(g, v), w_boundary(a, n, v), rtol=1e-5)


def test_w_boundary_n6_formula():
    v = np.linspace(0, 6, 13)
    z1 = complex(-1.5, SQ3 / 2)
    expected = 2 * np.exp(-1.5 * v) * np.real(z1**2 * np.exp(1j * SQ3 * v / 2))
    np.testing.assert_allclose(w_boundary(1.0, 6, v), expected, rtol=1e-13, atol=1e-15)


def test_w_boundary_n3_integral():
    # independent adaptive quadrature of the branch-cut formula
    from scipy import special as sp

    v = 0.8
    f = lambda u: u * math.exp(-v * u) / (sp.kv(1, u) ** 2 + math.pi**2 * sp.iv(1, u) ** 2)
    ref, _ = integrate.quad(f, 0, 60, epsabs=0, epsrel=1e-12, limit=200)
    assert w_boundary(1.0, 3, v) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("n", range(3, 9))
@pytest.mark.parametrize("a,x", GEOMETRIES)
def test_moment_identities(n, a, x):
    g = Geometry(n, a, x)
    s, lam = g.s, g.lam
    m0, m1, m2 = (w_moment(g, k) for k in range(3))
    assert lam * m0 == pytest.approx(s * (s + 1) * (x / a) ** s * lam / (2 * x * a), rel=1e-7)
    assert -lam * a * m1 == pytest.approx(1 - (x / a) ** s, rel=1e-7)
    assert a**2 / 2 * m2 == pytest.approx(1.0, rel=1e-7)


@pytest.mark.parametrize("n", range(3, 9))
@pytest.mark.parametrize("a,x", GEOMETRIES)
def test_laplace_identity(n, a, x):
    g = Geometry(n, a, x)
    zs = np.array([0.1, 0.5, 1.0, 3.0, 10.0])
    np.testing.assert_allclose(w_evaluator(g).laplace(zs), f_lambda(g, zs), rtol=1e-7)


def test_divergent_moment_rejected():
    with pytest.raises(ValueError):
        w_moment(Geometry(3, 1.0, 2.0), 3)
    with pytest.raises(ValueError):
        w_moment(Geometry(4, 1.0, 2.0), -1)
    assert np.isfinite(w_moment(Geometry(4, 1.0, 2.0), 3))


def test_coarse_and_fine_rules_agree():
    ev = w_evaluator(Geometry(5, 1.0, 2.0))
    v = np.geomspace(1e-3, 1e3, 40)
    fine = ev(v)
    # the coarse rule is only an error estimator: compare on the scale of the peak
    assert np.max(np.abs(ev(v, coarse=True) - fine)) < 1e-8 * np.max(np.abs(fine))
