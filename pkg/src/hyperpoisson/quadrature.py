"""Vectorised quadrature rules shared by the kernel and w-function code.

Everything here works on whole node arrays so that the integrands can be
tabulated once and reused (matrix products instead of nested adaptive loops).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import optimize
from scipy import special as sp

FINE_ORDER = 20
COARSE_ORDER = 12


@lru_cache(maxsize=None)
def _legendre(m: int):
    t, w = sp.roots_legendre(m)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def panel_rule(edges, m: int = FINE_ORDER):
    """Composite Gauss-Legendre rule with ``m`` nodes on each panel."""
    edges = np.asarray(edges, dtype=float)
    if np.any(np.diff(edges) <= 0):
        raise ValueError("panel edges must be strictly increasing")
    t, w = _legendre(m)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (half * t + 0.5 * (hi + lo)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


def geometric_edges(lo: float, hi: float, ratio: float = 2.0) -> np.ndarray:
    """Edges lo, lo*ratio, ... up to (and including) hi."""
    k = max(1, math.ceil(math.log(hi / lo) / math.log(ratio) - 1e-12))
    return lo * ratio ** np.arange(k + 1) * (hi / (lo * ratio**k)) ** (np.arange(k + 1) / k)


@dataclass(frozen=True)
class Rule:
    nodes: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.nodes)


# v-variable (dimensionless) of the w-functions: geometric panels resolve every
# scale from 1e-12 to 1e15, uniform panels resolve the residue oscillations.
V_EDGES = np.concatenate(
    [[0.0], 2.0 ** np.arange(-40, 0), np.arange(1.0, 64.01, 0.5), 2.0 ** np.arange(7, 53)]
)
V_MAX = float(V_EDGES[-1])

# u-variable of the branch-cut integral; the panel [2^-64, 1] is needed for the
# e^{-vu} kernel at v up to V_MAX.
U_SMALL_EDGES = np.concatenate([[0.0], 2.0 ** np.arange(-64, 1)])


@lru_cache(maxsize=None)
def v_rule(m: int = FINE_ORDER) -> Rule:
    nodes, weights = panel_rule(V_EDGES, m)
    return Rule(nodes, weights)


def u_rule(u_max: float, m: int = FINE_ORDER) -> Rule:
    edges = np.concatenate([U_SMALL_EDGES, np.arange(2.0, math.ceil(u_max) + 1.0)])
    nodes, weights = panel_rule(edges, m)
    return Rule(nodes, weights)


def exp_sinh_rule(h: float = 1 / 64, t_lo: float = -4.6, t_hi: float = 3.2) -> Rule:
    """Double-exponential rule for integrals over (0, inf).

    Uses ``u = exp(pi/2 sinh t)``; endpoint algebraic/logarithmic behaviour at
    0 and exponential decay at infinity are both handled.
    """
    t = np.arange(t_lo, t_hi + h / 2, h)
    arg = 0.5 * math.pi * np.sinh(t)
    nodes = np.exp(arg)
    weights = h * 0.5 * math.pi * np.cosh(t) * nodes
    return Rule(nodes, weights)


def bessel_j_zeros(mu: float, t_max: float) -> np.ndarray:
    """Positive zeros of J_mu below ``t_max`` (bracketed scan + Brent)."""
    step = 0.25
    grid = np.arange(step, t_max + step, step)
    vals = sp.jv(mu, grid)
    idx = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    zeros = [optimize.brentq(lambda t: sp.jv(mu, t), grid[i], grid[i + 1], xtol=1e-15) for i in idx]
    return np.asarray(zeros)


def iterated_average(partial_sums, depth: int):
    """Repeated pairwise averaging of partial sums of an alternating series."""
    s = np.asarray(partial_sums, dtype=float)
    for _ in range(min(depth, len(s) - 1)):
        s = 0.5 * (s[:-1] + s[1:])
    return s


@dataclass(frozen=True)
class HankelResult:
    value: float
    error: float
    segments: int


def hankel_integral(
    f,
    mu: float,
    rho: float,
    *,
    scale: float = 1.0,
    rtol: float = 1e-13,
    max_segments: int = 20000,
    batch: int = 64,
    order: int = 24,
) -> HankelResult:
    """``int_0^inf f(r) J_mu(r rho) dr`` for rho > 0.

    ``f`` must accept an array of r values.  The range is split at the zeros
    of J_mu(r rho); the head segment [0, first zero] is refined geometrically
    towards 0, each later half-oscillation gets one Gauss-Legendre panel.
    Segment contributions are summed until they are negligible, and the tail
    of the alternating partial sums is accelerated by iterated averaging.
    ``scale`` is a hint for where ``f`` lives (decay length), used only to
    start the zero table at a sensible size.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    t, w = _legendre(order)

    def panels(lo, hi):
        half = 0.5 * (hi - lo)
        nodes = half[:, None] * t + 0.5 * (hi + lo)[:, None]
        return nodes, half[:, None] * w

    t_max = max(64.0, 8.0 * rho * scale)
    zeros = bessel_j_zeros(mu, t_max) / rho
    head_edges = zeros[0] * np.concatenate([[0.0], 2.0 ** np.arange(-30, 1)])
    nodes, weights = panels(head_edges[:-1], head_edges[1:])
    head = float(np.sum(weights * f(nodes) * sp.jv(mu, nodes * rho)))

    sums = [head]
    contributions = []
    k = 0
    small_run = 0
    while k < max_segments:
        while k + batch + 1 >= len(zeros):
            t_max *= 2
            zeros = bessel_j_zeros(mu, t_max) / rho
        lo, hi = zeros[k : k + batch], zeros[k + 1 : k + batch + 1]
        nodes, weights = panels(lo, hi)
        seg = np.sum(weights * f(nodes) * sp.jv(mu, nodes * rho), axis=1)
        for c in seg:
            contributions.append(float(c))
            sums.append(sums[-1] + c)
            if abs(c) <= rtol * 1e-3 * abs(sums[-1]) or c == 0.0:
                small_run += 1
            else:
                small_run = 0
        k += batch
        if small_run >= 8:
            break
    raw = sums[-1]
    # rounding in the partial sums scales with the gross (absolute) mass
    gross = abs(head) + float(np.sum(np.abs(contributions)))
    floor = 64 * np.finfo(float).eps * gross
    if small_run >= 8:
        return HankelResult(raw, floor + abs(contributions[-1]), len(contributions))
    accel = iterated_average(sums[-24:], 12)
    value = float(accel[-1])
    err = floor + abs(value - raw)
    if len(accel) > 1:
        err = max(err, abs(float(accel[-1] - accel[-2])))
    return HankelResult(value, err, len(contributions))
