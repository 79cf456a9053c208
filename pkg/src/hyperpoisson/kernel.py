"""The Poisson kernel P_a(x, rho) of the half-space {height > a} in H^n.

Three independent evaluation routes:

* ``representation``: ``Gamma(s)/(2 pi^{n/2}) lam/z^s int w(v) Phi(kappa/z) dv``
  on the tabulated w (see :mod:`hyperpoisson.wfun`);
* ``hankel``: radial Fourier inversion of ``(x/a)^nu K_nu(rx)/K_nu(ra)``;
* ``closed``: the explicit single-integral formulas for n = 3, 4, 6,
  evaluated with adaptive quadrature (QUADPACK) and the L-form integrand.

For n = 2 every route reduces to the Euclidean (Cauchy) kernel at height
x - a.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy import special as sp

from . import quadrature as quad
from .wfun import Geometry, w_evaluator

__all__ = [
    "METHODS",
    "KernelQuery",
    "KernelValue",
    "PhiInputs",
    "big_l",
    "fourier_transform",
    "kernel_euclidean",
    "kernel_hn",
    "kernel_values",
    "phi",
    "poisson_kernel",
    "poisson_kernel_closed",
    "poisson_kernel_hankel",
    "poisson_kernel_rep",
    "sphere_area",
]

METHODS = ("representation", "hankel", "closed")
_ALIASES = {"rep": "representation", "representation": "representation", "hankel": "hankel", "closed": "closed"}
PHI_SERIES_CUTOFF = 1e-3


@dataclass(frozen=True)
class KernelQuery:
    geometry: Geometry
    rho: float

    def __post_init__(self):
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise ValueError(f"rho must be a finite nonnegative number, got {self.rho!r}")


@dataclass(frozen=True)
class PhiInputs:
    z: float
    kappa: float

    @classmethod
    def make(cls, lam: float, rho: float, v: float, a: float) -> "PhiInputs":
        return cls(lam**2 + rho**2, (lam + a * v) ** 2 - lam**2)

    @property
    def u(self) -> float:
        return self.kappa / self.z


@dataclass(frozen=True)
class KernelValue:
    value: float
    method: str
    err_estimate: float


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere S^{d-1} in R^d."""
    return 2 * math.pi ** (d / 2) / math.gamma(d / 2)


def phi(u, s: float):
    """Phi(u) = (1+u)^{-s} - 1 + s u, with a binomial series for small u."""
    u = np.asarray(u, dtype=float)
    if np.any(u < 0):
        raise ValueError("phi needs u >= 0")
    direct = (1 + u) ** (-s) - 1 + s * u
    small = u < PHI_SERIES_CUTOFF
    if np.any(small):
        us = np.where(small, u, 0.0)
        total = np.zeros_like(us)
        coef = s * (s + 1) / 2  # (s)_2 / 2!
        term = coef * us**2
        for j in range(2, 16):
            total = total + term
            term = -term * (s + j) / (j + 1) * us
        direct = np.where(small, total, direct)
    return direct[()] if direct.ndim == 0 else direct


def big_l(lam, rho, v, a, s):
    """L = s kappa (kappa+z)^s - z [(kappa+z)^s - z^s]."""
    z = lam**2 + np.asarray(rho, dtype=float) ** 2
    kappa = (lam + a * np.asarray(v, dtype=float)) ** 2 - lam**2
    return s * kappa * (kappa + z) ** s - z * ((kappa + z) ** s - z**s)


def kernel_hn(x: float, rho, n: int):
    """Poisson kernel of the whole of H^n (the a -> 0 limit)."""
    rho = np.asarray(rho, dtype=float)
    c = math.gamma(n - 1) / (math.pi ** ((n - 1) / 2) * math.gamma((n - 1) / 2))
    out = c * (x / (x**2 + rho**2)) ** (n - 1)
    return out[()] if out.ndim == 0 else out


def kernel_euclidean(x: float, rho, n: int):
    """Classical Poisson kernel of the Euclidean half-space in R^n."""
    rho = np.asarray(rho, dtype=float)
    out = math.gamma(n / 2) / math.pi ** (n / 2) * x / (x**2 + rho**2) ** (n / 2)
    return out[()] if out.ndim == 0 else out


def fourier_transform(g: Geometry, u_norm):
    """(x/a)^nu K_nu(u x) / K_nu(u a), equal to 1 at u = 0."""
    u = np.asarray(u_norm, dtype=float)
    if np.any(u < 0):
        raise ValueError("u_norm must be nonnegative")
    uu = np.where(u > 0, u, 1.0)
    val = g.ratio**g.nu * sp.kve(g.nu, uu * g.x) / sp.kve(g.nu, uu * g.a) * np.exp(-uu * g.lam)
    out = np.where(u > 0, val, 1.0)
    return out[()] if out.ndim == 0 else out


def _rep_prefactor(g: Geometry, rho):
    z = g.lam**2 + rho**2
    return math.gamma(g.s) / (2 * math.pi ** (g.n / 2)) * g.lam / z**g.s, z


def rep_values(g: Geometry, rhos) -> tuple[np.ndarray, np.ndarray]:
    """Representation-formula values and error estimates on an array of rho."""
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    ev = w_evaluator(g)
    pref, z = _rep_prefactor(g, rhos)
    lam, a, s = g.lam, g.a, g.s

    def integrand(v):
        kappa = (2 * lam + a * v) * (a * v)
        return phi(kappa[None, :] / z[:, None], s)

    fine = ev.integrate(integrand)
    coarse = ev.integrate(integrand, coarse=True)
    return pref * fine, np.abs(pref * (fine - coarse)) + 1e-15 * np.abs(pref * fine)


def poisson_kernel_rep(q: KernelQuery) -> KernelValue:
    val, err = rep_values(q.geometry, [q.rho])
    return KernelValue(float(val[0]), "representation", float(err[0]))


def _hankel_f(g: Geometry):
    nu, x, a, lam = g.nu, g.x, g.a, g.lam

    def f(r):
        r = np.asarray(r, dtype=float)
        rr = np.where(r > 0, r, 1.0)
        ratio = g.ratio**nu * sp.kve(nu, rr * x) / sp.kve(nu, rr * a) * np.exp(-rr * lam)
        return np.where(r > 0, ratio, 1.0)

    return f


def poisson_kernel_hankel(q: KernelQuery) -> KernelValue:
    """Radial Fourier inversion in dimension n - 1."""
    g = q.geometry
    nu, mu = g.nu, (g.n - 3) / 2
    f = _hankel_f(g)
    if q.rho == 0:
        c = 2.0 ** (2 - g.n) / math.gamma(nu) * math.pi ** (-nu)
        pieces = [(0.0, 1.0 / g.lam), (1.0 / g.lam, np.inf)]
        total = err = 0.0
        for lo, hi in pieces:
            val, e = integrate.quad(
                lambda r: float(f(r)) * r ** (g.n - 2), lo, hi, epsabs=0, epsrel=1e-13, limit=500
            )
            total += val
            err += e
        return KernelValue(c * total, "hankel", c * err)
    res = quad.hankel_integral(lambda r: f(r) * r**nu, mu, q.rho, scale=1.0 / g.lam)
    c = (2 * math.pi) ** (-nu) * q.rho ** (-mu)
    return KernelValue(c * res.value, "hankel", c * res.error)


# --- closed forms (n = 3, 4, 6) -------------------------------------------

_DE = quad.exp_sinh_rule()
_DE_MASK = _DE.nodes < 350.0
_DE_NODES = _DE.nodes[_DE_MASK]
_DE_WEIGHTS = _DE.weights[_DE_MASK]


def _w_closed_n3(g: Geometry):
    a, x, lam = g.a, g.x, g.lam
    r = x / a
    u = _DE_NODES
    k1, i1 = sp.kve(1, u), sp.ive(1, u)
    num = sp.ive(1, r * u) * k1 * np.exp(-2 * u) - i1 * sp.kve(1, r * u) * np.exp(-2 * r * u)
    den = k1**2 * np.exp(-4 * u) + math.pi**2 * i1**2
    weights = _DE_WEIGHTS * num / den * u * x / (lam * a**2)

    def w(v):
        return float(np.dot(weights, np.exp(-v * u)))

    return w


def _w_closed_n6(g: Geometry):
    a, lam = g.a, g.lam
    c = math.sqrt(3) / 2

    def w(v):
        return 3 / a**3 * math.exp(-1.5 * v) * ((2 * lam + a) * math.cos(c * v) + math.sqrt(3) * a * math.sin(c * v))

    return w


def poisson_kernel_closed(q: KernelQuery) -> KernelValue:
    """Explicit single-integral formulas for n in {3, 4, 6}."""
    g, rho = q.geometry, q.rho
    n, a, lam = g.n, g.a, g.lam
    z = lam**2 + rho**2
    if n == 4:
        pref = lam / (2 * math.pi**2 * z**2)

        def integrand(v):
            return (2 * lam + a * v) ** 2 * v**2 * math.exp(-v) / ((lam + a * v) ** 2 + rho**2)

    elif n == 6:
        pref = lam / (2 * math.pi**3 * z**3)
        wv = _w_closed_n6(g)

        def integrand(v):
            t = a * v * (2 * lam + a * v)
            big = t**2 * (2 * t + 3 * z)
            return wv(v) * big / ((lam + a * v) ** 2 + rho**2) ** 2

    elif n == 3:
        pref = lam / (2 * math.pi * z**1.5)
        wv = _w_closed_n3(g)

        def integrand(v):
            t = a * v * (2 * lam + a * v)
            root = math.sqrt(t + z)
            # L-form with the cancelling bracket rewritten as t / (root + sqrt z)
            big = 0.5 * t * root - z * t / (root + math.sqrt(z))
            return wv(v) * big / root

    else:
        raise ValueError(f"closed forms exist for n in (3, 4, 6), not n={n}")

    total = err = 0.0
    for lo, hi in ((0.0, 1.0), (1.0, 8.0), (8.0, 64.0), (64.0, np.inf)):
        val, e = integrate.quad(integrand, lo, hi, epsabs=0, epsrel=1e-12, limit=400)
        total += val
        err += e
    return KernelValue(pref * total, "closed", pref * err)


# --- dispatch -------------------------------------------------------------


def _euclid_value(q: KernelQuery) -> KernelValue:
    g = q.geometry
    return KernelValue(float(kernel_euclidean(g.lam, q.rho, 2)), "closed", 0.0)


def poisson_kernel(q: KernelQuery, method: str | None = None) -> KernelValue:
    """Evaluate P_a(x, rho) by the requested method (default: representation)."""
    method = _ALIASES.get(method or "representation")
    if method is None:
        raise ValueError(f"unknown method; choose from {METHODS}")
    if q.geometry.n == 2:
        return _euclid_value(q)
    if method == "representation":
        return poisson_kernel_rep(q)
    if method == "hankel":
        return poisson_kernel_hankel(q)
    return poisson_kernel_closed(q)


def kernel_values(g: Geometry, rhos, method: str | None = None) -> list[KernelValue]:
    """Kernel values on a rho grid, in grid order (vectorised for the
    representation method)."""
    method = _ALIASES.get(method or "representation")
    if method is None:
        raise ValueError(f"unknown method; choose from {METHODS}")
    rhos = [float(r) for r in np.atleast_1d(rhos)]
    if g.n != 2 and method == "representation":
        vals, errs = rep_values(g, rhos)
        return [KernelValue(float(v), "representation", float(e)) for v, e in zip(vals, errs)]
    return [poisson_kernel(KernelQuery(g, r), method) for r in rhos]
