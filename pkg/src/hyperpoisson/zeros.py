"""Complex zeros of K_nu in the plane cut along the negative real axis.

For even n the zeros are the roots of the polynomial m_s.  For odd n (integer
nu) they are located by a coarse scan followed by Newton's method, and the
number found is cross-checked with an argument-principle count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import special as sp

from .special import m_s_coefficients, orders

__all__ = ["ZeroCountError", "ZeroSet", "argument_count", "find_zeros", "zero_count"]


class ZeroCountError(RuntimeError):
    """The zeros found do not match the expected count."""


@dataclass(frozen=True)
class ZeroSet:
    n: int
    zeros: tuple
    residual: float

    def __len__(self):
        return len(self.zeros)

    def __iter__(self):
        return iter(self.zeros)

    def __getitem__(self, i):
        return self.zeros[i]

    def as_array(self) -> np.ndarray:
        return np.array(self.zeros, dtype=complex)


def zero_count(n: int) -> int:
    """Number of zeros of K_nu, nu = (n-1)/2, off the cut.

    Even n: n/2 - 1.  Odd n: the even integer nearest to n/2 - 1 (for odd n
    that number is never equidistant from two even integers).
    """
    if int(n) != n or n < 3:
        raise ValueError(f"zero_count needs an integer n >= 3, got {n!r}")
    n = int(n)
    if n % 2 == 0:
        return n // 2 - 1
    return 2 * round((n - 2) / 4)


def _sort_key(z: complex):
    return (round(z.imag, 12), round(z.real, 12))


def _canonical(zs) -> tuple:
    return tuple(sorted((complex(z) for z in zs), key=_sort_key))


def _even_zeros(n: int) -> ZeroSet:
    s = n // 2 - 1
    coeffs = m_s_coefficients(s)
    poly = np.polynomial.Polynomial(coeffs)
    dpoly = poly.deriv()
    roots = np.asarray(np.roots(coeffs[::-1]), dtype=complex)
    polished = []
    for z in roots:
        for _ in range(8):
            step = poly(z) / dpoly(z)
            z = z - step
            if abs(step) <= 1e-16 * abs(z):
                break
        polished.append(z)
    # the coefficients are real: enforce exact conjugate pairs
    out = []
    for z in polished:
        if abs(z.imag) < 1e-13 * abs(z):
            out.append(complex(z.real, 0.0))
        elif z.imag > 0:
            out.extend([z, z.conjugate()])
    scale = np.polynomial.Polynomial(np.abs(coeffs))
    residual = max((abs(poly(z)) / scale(abs(z)) for z in out), default=0.0)
    return ZeroSet(n, _canonical(out), float(residual))


def _k_scaled(nu, z):
    return sp.kve(nu, z)


def argument_count(nu: float, re_lo: float, re_hi: float, im_lo: float, im_hi: float) -> int:
    """Zeros of K_nu inside a rectangle, by the change of argument on its boundary.

    ``e^z K_nu(z)`` is tracked (same zeros, tame modulus).  Edges are refined
    until consecutive phase increments are below 0.3 rad and every step is
    short relative to the distance from the origin.
    """
    corners = [
        complex(re_lo, im_lo),
        complex(re_hi, im_lo),
        complex(re_hi, im_hi),
        complex(re_lo, im_hi),
    ]
    total = 0.0
    for k in range(4):
        z0, z1 = corners[k], corners[(k + 1) % 4]
        t = np.linspace(0.0, 1.0, 401)
        for _ in range(40):
            zs = z0 + (z1 - z0) * t
            vals = _k_scaled(nu, zs)
            if np.any(vals == 0) or not np.all(np.isfinite(vals)):
                raise ZeroCountError("contour passes through a zero or singularity")
            dphi = np.angle(vals[1:] / vals[:-1])
            # a step long compared with |z| could hide a full turn near z = 0
            near = np.minimum(np.abs(zs[1:]), np.abs(zs[:-1]))
            bad = (np.abs(dphi) > 0.3) | (np.abs(np.diff(zs)) > 0.05 * near)
            if not np.any(bad):
                break
            mids = 0.5 * (t[:-1] + t[1:])[bad]
            t = np.sort(np.concatenate([t, mids]))
        else:
            raise ZeroCountError("argument tracking failed to resolve an edge")
        total += float(np.sum(dphi))
    return int(round(total / (2 * math.pi)))


def _newton_k(nu, z, iters=60):
    for _ in range(iters):
        k = sp.kv(nu, z)
        dk = -sp.kv(nu - 1, z) - nu / z * k
        step = k / dk
        # damp steps that would cross the cut or jump far
        if abs(step) > 0.5:
            step *= 0.5 / abs(step)
        z = z - step
        if z.imag <= 0:
            z = complex(z.real, 1e-3)
        if abs(step) <= 1e-15 * abs(z):
            break
    return z


def _odd_zeros(n: int) -> ZeroSet:
    nu = (n - 1) / 2
    expected = zero_count(n)
    if expected == 0:
        return ZeroSet(n, (), 0.0)
    eta = 1e-3
    bound = nu + 5.0
    for _ in range(4):
        count = argument_count(nu, -bound, 0.5, eta, bound)
        if count == expected // 2:
            break
        bound *= 1.5
    else:
        raise ZeroCountError(
            f"argument principle finds {count} zeros in the upper half, expected {expected // 2}"
        )

    xs = np.linspace(-bound, 0.0, 241)
    ys = np.linspace(0.02, bound, 241)
    grid = xs[None, :] + 1j * ys[:, None]
    mod = np.abs(sp.kve(nu, grid))
    found: list[complex] = []
    inner = mod[1:-1, 1:-1]
    neighbours = np.stack(
        [mod[1 + di : mod.shape[0] - 1 + di, 1 + dj : mod.shape[1] - 1 + dj]
         for di in (-1, 0, 1) for dj in (-1, 0, 1) if (di, dj) != (0, 0)]
    )
    minima = np.argwhere(inner < neighbours.min(axis=0))
    seeds = [grid[i + 1, j + 1] for i, j in minima]
    seeds.sort(key=lambda z: abs(sp.kve(nu, z)))
    for seed in seeds:
        z = _newton_k(nu, complex(seed))
        scale = abs(sp.kv(nu - 1, z)) * max(1.0, abs(z))
        if z.imag > 0 and z.real < 0 and abs(sp.kv(nu, z)) <= 1e-12 * scale:
            if all(abs(z - f) > 1e-8 * max(1.0, abs(z)) for f in found):
                found.append(z)
        if len(found) == expected // 2:
            break
    if len(found) != expected // 2:
        raise ZeroCountError(f"located {len(found)} of {expected // 2} upper-half zeros of K_{nu:g}")
    zs = found + [z.conjugate() for z in found]
    residual = max(
        abs(sp.kv(nu, z)) / (abs(sp.kv(nu - 1, z)) * max(1.0, abs(z))) for z in zs
    )
    return ZeroSet(n, _canonical(zs), float(residual))


@lru_cache(maxsize=None)
def find_zeros(n: int) -> ZeroSet:
    """All zeros of K_{(n-1)/2} off the cut, ordered by (imag, real)."""
    orders(n)
    if n < 3:
        raise ValueError("find_zeros needs n >= 3")
    n = int(n)
    zs = _even_zeros(n) if n % 2 == 0 else _odd_zeros(n)
    if len(zs) != zero_count(n):
        raise ZeroCountError(f"found {len(zs)} zeros for n={n}, expected {zero_count(n)}")
    return zs
