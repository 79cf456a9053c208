"""The density w_lambda and its Laplace transform F_lambda.

``w = w1 + w2``: w1 is a finite sum of exponentials e^{z_i v} weighted by the
residues of F_lambda at the zeros of K_nu, w2 (odd n only) is a Laplace
transform along the branch cut of K_nu.  A :class:`WEvaluator` tabulates the
branch-cut integrand once per geometry and evaluates w on arbitrary v arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import special as sp

from . import quadrature as quad
from .special import orders
from .zeros import ZeroSet, find_zeros

__all__ = [
    "Geometry",
    "QPolynomial",
    "WEvaluator",
    "branch_density",
    "f_lambda",
    "residue_at",
    "residue_at_even",
    "w",
    "w1",
    "w2",
    "w_boundary",
    "w_evaluator",
    "w_moment",
]

IMAG_RTOL = 1e-12
_U_TAIL_RTOL = 1e-18
_CHUNK = 2048


@dataclass(frozen=True)
class Geometry:
    """Half-space {height > a} entered from height x > a in H^n."""

    n: int
    a: float
    x: float

    def __post_init__(self):
        orders(self.n)
        if not (self.a > 0 and math.isfinite(self.a)):
            raise ValueError(f"boundary height a must be positive, got {self.a!r}")
        if not (self.x > self.a and math.isfinite(self.x)):
            raise ValueError(f"start height x must exceed a, got x={self.x!r}, a={self.a!r}")

    @property
    def lam(self) -> float:
        return self.x - self.a

    @property
    def ratio(self) -> float:
        return self.x / self.a

    @property
    def nu(self) -> float:
        return (self.n - 1) / 2

    @property
    def s(self) -> float:
        return self.n / 2 - 1

    def scaled(self, t: float) -> "Geometry":
        return Geometry(self.n, t * self.a, t * self.x)


@dataclass(frozen=True)
class QPolynomial:
    """Q(z) = z - s(s+1) lambda / (2 a x), the linear part removed from F_lambda."""

    constant: float
    slope: float = 1.0

    @classmethod
    def for_geometry(cls, g: Geometry) -> "QPolynomial":
        return cls(-g.s * (g.s + 1) * g.lam / (2 * g.a * g.x))

    def __call__(self, z):
        return self.slope * np.asarray(z) + self.constant


def f_lambda(g: Geometry, z):
    """F_lambda(z) for real z >= 0 (vectorised).

    The Bessel ratio is evaluated with scaled K so that no exponential factor
    is formed explicitly; below z = 1e-8 a first-order Taylor expansion about
    0 replaces the formula.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise ValueError("f_lambda needs z >= 0")
    nu, s, r, lam, a = g.nu, g.s, g.ratio, g.lam, g.a
    f0 = s * (s + 1) * r**s / (2 * g.x * a)
    f1 = (1 - r**s) / (lam * a**2)
    q = QPolynomial.for_geometry(g)
    small = z < 1e-8
    zz = np.where(small, 1.0, z)
    ratio = sp.kve(nu, r * zz) / sp.kve(nu, zz)
    val = ((zz / a) * r**nu * ratio - r**s * q(zz / a)) / lam
    out = np.where(small, f0 + f1 * z, val)
    return out[()] if out.ndim == 0 else out


def residue_at(g: Geometry, zi: complex) -> complex:
    """Residue of F_lambda at a zero z_i of K_nu (general formula)."""
    zi = complex(zi)
    nu, r = g.nu, g.ratio
    denom = sp.kve(nu - 1, zi)
    if abs(denom) < 1e-8:
        raise ValueError("K_{nu-1} vanishes at a zero of K_nu; the zero set is wrong")
    # e^{lam z/a} K(xz/a) / K_{nu-1}(z) == kve(xz/a) / kve_{nu-1}(z)
    return complex(-(r**nu) * zi * sp.kve(nu, r * zi) / (g.lam * g.a * denom))


def residue_at_even(g: Geometry, zi: complex) -> complex:
    """Residue through the m_s polynomials; even n only (cross-check route)."""
    from .special import m_s_poly

    if g.n % 2:
        raise ValueError("polynomial residue route needs even n")
    s = g.n // 2 - 1
    zi = complex(zi)
    return complex(
        -m_s_poly(s, g.ratio * zi) / ((g.n - 2) * g.lam * g.a * m_s_poly(s - 1, zi))
    )


def branch_density(nu: float, ratio: float, u):
    """Bracketed part of the branch-cut integrand, times e^{-lambda u / a}.

    Returns ``[I(ru)K(u) - I(u)K(ru)] e^{-(r-1)u} / (K(u)^2 + pi^2 I(u)^2)``
    with r = x/a, written in terms of scaled Bessel functions.
    """
    u = np.asarray(u, dtype=float)
    ku = sp.kve(nu, u)
    iu = sp.ive(nu, u)
    num = sp.ive(nu, ratio * u) - iu * (sp.kve(nu, ratio * u) / ku) * np.exp(-2 * (ratio - 1) * u)
    den = ku * np.exp(-2 * u) + math.pi**2 * iu**2 * np.exp(2 * u) / ku
    return num / den


def _boundary_density(nu: float, u):
    """u / (K(u)^2 + pi^2 I(u)^2), scaled to avoid overflow."""
    u = np.asarray(u, dtype=float)
    ku = sp.kve(nu, u)
    q = sp.ive(nu, u) / ku
    return u * np.exp(-2 * u) / ku**2 / (np.exp(-4 * u) + math.pi**2 * q**2)


def _u_cutoff(density) -> float:
    """Smallest integer U >= 8 past which the integrand is negligible."""
    probe = np.arange(1.0, 200.0)
    vals = np.abs(density(probe))
    peak = max(vals.max(), np.abs(density(np.geomspace(1e-3, 1, 30))).max())
    # integrand ~ poly * e^{-2u}: the tail beyond U is below ~ value(U)
    ok = np.nonzero(vals <= _U_TAIL_RTOL * peak)[0]
    if len(ok) == 0:
        raise ArithmeticError("branch-cut integrand does not decay")
    return float(max(8.0, probe[ok[0]]))


@dataclass(frozen=True)
class _BranchTable:
    nodes: np.ndarray
    weights: np.ndarray  # quadrature weight * integrand * prefactor


@dataclass(frozen=True, eq=False)
class WEvaluator:
    """Precomputed pieces of w_lambda for one geometry.

    ``residues[i]`` belongs to ``zeros.zeros[i]``; the branch tables are ``None`` for
    even n.  Instances are immutable and safe to share.
    """

    geometry: Geometry
    zeros: ZeroSet
    residues: tuple
    branch_fine: _BranchTable | None = field(repr=False, default=None)
    branch_coarse: _BranchTable | None = field(repr=False, default=None)
    _tables: dict = field(repr=False, default_factory=dict)

    @classmethod
    def build(cls, g: Geometry) -> "WEvaluator":
        if g.n < 3:
            raise ValueError("w_lambda is defined for n >= 3")
        zs = find_zeros(g.n)
        # conjugate zeros get exactly conjugate residues; near x = a the
        # numerator K_nu(r z_i) cancels and independent evaluation would leave
        # O(eps/lambda) imaginary noise
        if g.n % 2 == 0:
            res = tuple(residue_at_even(g, z) for z in zs)
        else:
            res = tuple(
                residue_at(g, z.conjugate()).conjugate() if z.imag < 0 else residue_at(g, z)
                for z in zs
            )
        fine = coarse = None
        if g.n % 2:
            nu, r = g.nu, g.ratio
            pref = (-1) ** (int(nu) + 1) * r**nu / (g.lam * g.a)

            def density(u):
                return branch_density(nu, r, u) * u

            cut = _u_cutoff(density)
            tables = []
            for m in (quad.FINE_ORDER, quad.COARSE_ORDER):
                rule = quad.u_rule(cut, m)
                tables.append(_BranchTable(rule.nodes, rule.weights * density(rule.nodes) * pref))
            fine, coarse = tables
        return cls(g, zs, res, fine, coarse)

    def w1(self, v):
        v = np.asarray(v, dtype=float)
        if not self.residues:
            return np.zeros_like(v)[()] if v.ndim == 0 else np.zeros_like(v)
        zs = self.zeros.as_array()
        res = np.array(self.residues)
        terms = res[None, :] * np.exp(np.outer(v.ravel(), zs))
        total = terms.sum(axis=1)
        mag = np.abs(terms).sum(axis=1)
        if np.any(np.abs(total.imag) > IMAG_RTOL * np.maximum(mag, 1e-300)):
            raise ArithmeticError("residue sum is not real; conjugate pairing is broken")
        out = total.real.reshape(v.shape)
        return out[()] if out.ndim == 0 else out

    def w2(self, v, coarse: bool = False):
        if self.branch_fine is None:
            raise ValueError("w2 exists only for odd n")
        table = self.branch_coarse if coarse else self.branch_fine
        v = np.asarray(v, dtype=float)
        flat = v.ravel()
        out = np.empty(flat.shape)
        for lo in range(0, len(flat), _CHUNK):
            blk = flat[lo : lo + _CHUNK]
            out[lo : lo + _CHUNK] = np.exp(-np.outer(blk, table.nodes)) @ table.weights
        out = out.reshape(v.shape)
        return out[()] if out.ndim == 0 else out

    def __call__(self, v, coarse: bool = False):
        out = self.w1(v)
        if self.branch_fine is not None:
            out = out + self.w2(v, coarse)
        return out

    def table(self, coarse: bool = False):
        """(nodes, weights, w(nodes)) on the standard v-rule."""
        if coarse not in self._tables:
            rule = quad.v_rule(quad.COARSE_ORDER if coarse else quad.FINE_ORDER)
            self._tables[coarse] = (rule.nodes, rule.weights, self(rule.nodes, coarse))
        return self._tables[coarse]

    def integrate(self, h, coarse: bool = False):
        """``int_0^inf h(v) w(v) dv``; ``h`` maps the node array to values
        (an extra leading axis is allowed for batched integrands)."""
        v, wt, wv = self.table(coarse)
        return np.asarray(h(v)) @ (wt * wv)

    def moment(self, k: int) -> float:
        if self.geometry.n % 2 and k > self.geometry.n - 1:
            raise ValueError(f"moment {k} of w diverges for odd n={self.geometry.n}")
        return float(self.integrate(lambda v: v**k))

    def laplace(self, z) -> np.ndarray:
        z = np.atleast_1d(np.asarray(z, dtype=float))
        return self.integrate(lambda v: np.exp(-np.outer(z, v)).reshape(len(z), -1))


@lru_cache(maxsize=64)
def w_evaluator(g: Geometry) -> WEvaluator:
    return WEvaluator.build(g)


def w1(g: Geometry, v):
    return w_evaluator(g).w1(v)


def w2(g: Geometry, v):
    if g.n % 2 == 0:
        raise ValueError("w2 exists only for odd n")
    return w_evaluator(g).w2(v)


def w(g: Geometry, v):
    return w_evaluator(g)(v)


def w_moment(g: Geometry, k: int) -> float:
    """``int_0^inf v^k w_lambda(v) dv`` by quadrature on the tabulated w."""
    if int(k) != k or k < 0:
        raise ValueError("moment order must be a nonnegative integer")
    return w_evaluator(g).moment(int(k))


@lru_cache(maxsize=32)
def _boundary_table(n: int):
    nu = (n - 1) / 2
    cut = _u_cutoff(lambda u: _boundary_density(nu, u))
    rule = quad.u_rule(cut)
    return rule.nodes, rule.weights * _boundary_density(nu, rule.nodes)


def w_boundary(a: float, n: int, v):
    """The x -> a+ limit of w_lambda(v)."""
    if not a > 0:
        raise ValueError("a must be positive")
    orders(n)
    v = np.asarray(v, dtype=float)
    flat = v.ravel()
    zs = find_zeros(n).as_array()
    out = np.zeros(flat.shape)
    if len(zs):
        terms = np.exp(np.outer(flat, zs)) * zs**2
        out += terms.sum(axis=1).real
    if n % 2:
        nodes, weights = _boundary_table(n)
        sign = (-1) ** (int((n - 1) // 2) + 1)
        for lo in range(0, len(flat), _CHUNK):
            blk = flat[lo : lo + _CHUNK]
            out[lo : lo + _CHUNK] += sign * (np.exp(-np.outer(blk, nodes)) @ weights)
    out = out.reshape(v.shape) / a**2
    return out[()] if out.ndim == 0 else out
