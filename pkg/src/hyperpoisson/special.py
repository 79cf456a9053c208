"""Bessel-function substrate.

Real-argument J, I and K (plus exponentially scaled I and K), the modified
Bessel function K on the plane cut along (-inf, 0], the m_s polynomials and
the two-term large-argument expansion of e^z z^nu K_nu(z).

The real-line functions are thin, validated wrappers over ``scipy.special``
(AMOS / Cephes).  Boundary values on the cut are assembled from real I and K
so that the branch data never depends on how a complex routine treats a
signed zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

__all__ = [
    "CutComplex",
    "bessel_i",
    "bessel_ie",
    "bessel_j",
    "bessel_k",
    "bessel_k_complex",
    "bessel_ke",
    "d_const",
    "expansion_coefficient",
    "k_scaled_expansion",
    "m_s_coefficients",
    "m_s_poly",
    "orders",
]


def _scalar_or_array(values):
    values = np.asarray(values)
    return values[()] if values.ndim == 0 else values


def orders(n: int) -> tuple[float, float, float]:
    """Return ``(nu, mu, s) = ((n-1)/2, (n-3)/2, n/2-1)`` for dimension ``n``."""
    if int(n) != n or n < 2:
        raise ValueError(f"dimension must be an integer >= 2, got {n!r}")
    return (n - 1) / 2, (n - 3) / 2, n / 2 - 1


def d_const(n: int) -> float:
    """Normalising constant linking m_s to K_nu: ``m_s(z) = d_n e^z z^nu K_nu(z)``."""
    s = n / 2 - 1
    return math.pi ** -0.5 * 2.0 ** (s + 0.5) * math.gamma(n / 2)


def _k_order(nu):
    # scipy's kv returns nan for subnormal orders; K is even in nu
    nu = np.asarray(nu, dtype=float)
    return np.where(np.abs(nu) < np.finfo(float).tiny, 0.0, nu)


def bessel_j(mu, z):
    """Bessel function of the first kind J_mu(z) for real z >= 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z < 0) or np.any(np.isnan(z)):
        raise ValueError("bessel_j requires z >= 0")
    return _scalar_or_array(sp.jv(mu, z))


def bessel_i(nu, z):
    """Modified Bessel function I_nu(z) for z > 0.

    Raises ``OverflowError`` when the result exceeds the double range;
    use :func:`bessel_ie` for large arguments.
    """
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0) or np.any(np.isnan(z)):
        raise ValueError("bessel_i requires z > 0")
    out = sp.iv(nu, z)
    if np.any(np.isinf(out)):
        raise OverflowError("I_nu(z) overflows double precision; use bessel_ie")
    return _scalar_or_array(out)


def bessel_ie(nu, z):
    """Exponentially scaled ``e^{-z} I_nu(z)`` for z > 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0) or np.any(np.isnan(z)):
        raise ValueError("bessel_ie requires z > 0")
    return _scalar_or_array(sp.ive(nu, z))


def bessel_k(nu, z):
    """Macdonald function K_nu(z) for z > 0 (underflows to 0 for huge z)."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0) or np.any(np.isnan(z)):
        raise ValueError("bessel_k requires z > 0")
    return _scalar_or_array(sp.kv(_k_order(nu), z))


def bessel_ke(nu, z):
    """Exponentially scaled ``e^{z} K_nu(z)`` for z > 0."""
    z = np.asarray(z, dtype=float)
    if np.any(z <= 0) or np.any(np.isnan(z)):
        raise ValueError("bessel_ke requires z > 0")
    return _scalar_or_array(sp.kve(_k_order(nu), z))


@dataclass(frozen=True)
class CutComplex:
    """A point of the plane cut along (-inf, 0].

    ``side`` selects the one-sided limit when the point lies on the cut:
    +1 for the limit from above (im -> 0+), -1 for the limit from below.
    """

    re: float
    im: float = 0.0
    side: int = 1

    def __post_init__(self):
        if self.side not in (1, -1):
            raise ValueError("side must be +1 or -1")
        if self.on_cut and self.im != 0.0:
            raise ValueError("a point on the cut has zero imaginary part")

    @property
    def on_cut(self) -> bool:
        return self.im == 0.0 and self.re < 0.0

    @classmethod
    def from_complex(cls, z: complex) -> "CutComplex":
        """Build from a Python complex; a signed zero imaginary part picks the side."""
        z = complex(z)
        side = -1 if (z.imag == 0.0 and math.copysign(1.0, z.imag) < 0) else 1
        return cls(z.real, z.imag if z.imag != 0.0 else 0.0, side)


def bessel_k_complex(nu, z):
    """Principal-branch K_nu on the cut plane.

    ``z`` may be a :class:`CutComplex`, a Python/NumPy complex or a complex
    array.  For points on the negative real axis the one-sided limit is
    returned: ``K_nu(-y +- i0) = e^{-+ i pi nu} K_nu(y) -+ i pi I_nu(y)``.
    For plain complex input the sign of a zero imaginary part picks the side.
    """
    if isinstance(z, CutComplex):
        if z.re == 0.0 and z.im == 0.0:
            raise ValueError("K_nu is singular at z = 0")
        if z.on_cut:
            return _cut_limit(nu, -z.re, z.side)
        return complex(sp.kv(nu, complex(z.re, z.im)))

    arr = np.asarray(z, dtype=complex)
    if np.any(arr == 0):
        raise ValueError("K_nu is singular at z = 0")
    out = np.asarray(sp.kv(nu, arr), dtype=complex)
    on_cut = (arr.imag == 0.0) & (arr.real < 0.0)
    if np.any(on_cut):
        sides = np.where(np.signbit(arr.imag), -1, 1)
        y = -arr.real[on_cut]
        out = out.copy()
        out[on_cut] = _cut_limit(nu, y, sides[on_cut])
    return _scalar_or_array(out)


def _cut_limit(nu, y, side):
    y = np.asarray(y, dtype=float)
    side = np.asarray(side)
    phase = np.exp(-1j * math.pi * nu * side)
    val = phase * sp.kv(nu, y) - side * 1j * math.pi * sp.iv(nu, y)
    return _scalar_or_array(val)


def m_s_coefficients(s: int) -> np.ndarray:
    """Ascending real coefficients of the degree-``s`` polynomial m_s."""
    if int(s) != s or s < 0:
        raise ValueError("m_s is a polynomial only for integer s >= 0")
    s = int(s)
    n = 2 * s + 2
    lead = d_const(n) * math.sqrt(math.pi / 2)
    return np.array(
        [
            lead * math.factorial(2 * s - j) * 2.0 ** (j - s)
            / (math.factorial(j) * math.factorial(s - j))
            for j in range(s + 1)
        ]
    )


def m_s_poly(s: int, z):
    """Evaluate m_s(z) (complex or real, scalar or array) for integer s >= 0."""
    coeffs = m_s_coefficients(s)
    return _scalar_or_array(np.polynomial.polynomial.polyval(np.asarray(z), coeffs))


def expansion_coefficient(n: int, k: int) -> float:
    """c_k = sqrt(pi/2) Gamma(n/2+k) / (k! Gamma(n/2-k)), k in {0, 1}."""
    if k not in (0, 1):
        raise ValueError("only c_0 and c_1 are used")
    h = n / 2
    if k == 1 and h - 1 <= 0 and float(h - 1).is_integer():
        return 0.0  # 1/Gamma at a pole
    return math.sqrt(math.pi / 2) * math.gamma(h + k) / (math.factorial(k) * math.gamma(h - k))


def k_scaled_expansion(nu, z, terms: int = 2):
    """Large-z approximation of ``e^z z^nu K_nu(z)``.

    ``terms=1`` gives ``c_0 z^(nu-1/2)``; ``terms=2`` adds the ``c_1/(2z)``
    correction.  Only meaningful for z >= 1.
    """
    if terms not in (1, 2):
        raise ValueError("terms must be 1 or 2")
    z = np.asarray(z, dtype=float)
    if np.any(z < 1):
        raise ValueError("expansion used only for z >= 1")
    n = 2 * nu + 1
    series = expansion_coefficient(n, 0)
    if terms == 2:
        series = series + expansion_coefficient(n, 1) / (2 * z)
    return _scalar_or_array(series * z ** (nu - 0.5))
