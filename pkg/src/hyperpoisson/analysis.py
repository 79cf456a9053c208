"""Asymptotic laws, the semigroup identity and moment cancellations.

Power laws are measured, not assumed: each fit reports its exponent, the
intercept (the unspecified constant, informational only), r^2 and the window
it was fitted on.  Windows are moved outwards until the local slope stops
drifting, so pre-asymptotic curvature does not leak into the exponent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special as sp

from . import quadrature as quad
from .kernel import (
    KernelQuery,
    kernel_hn,
    kernel_values,
    phi,
    poisson_kernel,
    rep_values,
    sphere_area,
)
from .wfun import Geometry, w_boundary, w_evaluator

__all__ = [
    "SlopeFit",
    "Thresholds",
    "bin_masses",
    "blowup_constant",
    "boundary_blowup",
    "boundary_limit_formula",
    "boundary_linear",
    "fit_power_law",
    "global_limit_residual",
    "kernel_mass",
    "radial_convolution",
    "remainder_limit",
    "semigroup_residual",
    "slope_rho_infinity",
    "slope_x_infinity",
    "vanishing_moments",
]


@dataclass(frozen=True)
class Thresholds:
    slope_rel: float = 0.05
    r_squared: float = 0.999
    drift: float = 0.01
    blowup_rel: float = 0.02
    linear_spread: float = 0.02
    semigroup_rel: float = 1e-3
    global_rel: float = 1e-3
    vanish_rel: float = 1e-6
    nonzero_rel: float = 1e-3


DEFAULTS = Thresholds()


@dataclass(frozen=True)
class SlopeFit:
    exponent: float
    intercept: float
    r_squared: float
    window: tuple[float, float]
    expected: float | None = None
    constant: float | None = None
    extras: dict = field(default_factory=dict, compare=False)

    def passed(self, rel: float = DEFAULTS.slope_rel, r2: float = DEFAULTS.r_squared) -> bool:
        if self.expected is None:
            raise ValueError("no expected exponent attached")
        return (
            abs(self.exponent - self.expected) <= rel * abs(self.expected)
            and self.r_squared >= r2
        )


def fit_power_law(xs, ys, expected: float | None = None) -> SlopeFit:
    """Least-squares line through (log x, log y)."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(xs) < 8:
        raise ValueError("a power-law fit needs at least 8 points")
    if np.any(ys <= 0):
        raise ValueError("power-law fit needs positive values")
    lx, ly = np.log(xs), np.log(ys)
    slope, icept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + icept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return SlopeFit(float(slope), float(icept), r2, (float(xs[0]), float(xs[-1])), expected)


def _local_drift(xs, ys) -> float:
    local = np.diff(np.log(ys)) / np.diff(np.log(xs))
    return float(local.max() - local.min())


def _auto_window(evaluate, start: float, expected: float, *, points: int = 8,
                 drift: float = DEFAULTS.drift, max_doublings: int = 40) -> SlopeFit:
    """Double the window start until the local slope drifts by < ``drift``."""
    lo = start
    for _ in range(max_doublings):
        xs = np.geomspace(lo, 4 * lo, points)
        ys = np.asarray(evaluate(xs), dtype=float)
        if np.all(ys > 0) and _local_drift(xs, ys) < drift:
            fit = fit_power_law(xs, ys, expected)
            return SlopeFit(fit.exponent, fit.intercept, fit.r_squared, fit.window, expected,
                            extras={"drift": _local_drift(xs, ys)})
        lo *= 2
    raise ArithmeticError("no asymptotic window found")


def slope_rho_infinity(g: Geometry) -> SlopeFit:
    """Exponent of P_a(x, rho) as rho -> infinity (expected -(2n-2))."""
    return _auto_window(
        lambda rhos: rep_values(g, rhos)[0], 2 * max(g.x, g.lam), -(2 * g.n - 2)
    )


def slope_x_infinity(n: int, a: float, rho: float, method: str | None = None) -> SlopeFit:
    """Exponent of P_a(x, rho) as x -> infinity at fixed rho (expected -(n-1))."""

    def evaluate(xs):
        return [poisson_kernel(KernelQuery(Geometry(n, a, x), rho), method).value for x in xs]

    return _auto_window(evaluate, 4 * max(a, rho, 1e-300), -(n - 1))


def blowup_constant(n: int) -> float:
    """lim_{x -> a+} P_a(x, 0) (x - a)^{n-1}."""
    return 2.0 ** (2 - n) * math.gamma(n - 1) * math.pi ** (-(n - 1) / 2) / math.gamma((n - 1) / 2)


def boundary_blowup(a: float, n: int, method: str | None = None,
                    lams=None) -> SlopeFit:
    """Fit of P_a(a + lam, 0) as lam -> 0+.

    The exponent is the log-log slope (expected -(n-1)); ``constant`` is the
    intercept at lam = 0 of a quadratic fit of P lam^{n-1} in lam.
    """
    lams = np.geomspace(1e-4 * a, 1e-2 * a, 12) if lams is None else np.asarray(lams, float)
    vals = np.array([poisson_kernel(KernelQuery(Geometry(n, a, a + t), 0.0), method).value
                     for t in lams])
    fit = fit_power_law(lams, vals, -(n - 1))
    scaled = vals * lams ** (n - 1)
    coeffs = np.polyfit(lams, scaled, 2)
    const = float(coeffs[-1])
    return SlopeFit(fit.exponent, fit.intercept, fit.r_squared, fit.window, -(n - 1), const,
                    extras={"expected_constant": blowup_constant(n)})


def boundary_limit_formula(n: int, a: float, rho: float) -> float:
    """lim_{x -> a+} P_a(x, rho)/(x - a) from the boundary density w."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    s = n / 2 - 1
    c = math.gamma(s) / (2 * math.pi ** (n / 2))
    rule = quad.v_rule()
    wv = w_boundary(a, n, rule.nodes)
    integral = float(np.dot(rule.weights * wv, (rho**2 + (a * rule.nodes) ** 2) ** (-s)))
    return c * (2 * s / rho ** (2 * s + 2) - s * (s + 1) / (2 * a**2 * rho ** (2 * s)) + integral)


def boundary_linear(n: int, a: float, rho: float, lams=None) -> dict:
    """P_a(a + lam, rho)/lam over lam in [1e-4, 1e-2] a and its limit."""
    lams = np.geomspace(1e-4 * a, 1e-2 * a, 9) if lams is None else np.asarray(lams, float)
    ratios = np.array([rep_values(Geometry(n, a, a + t), [rho])[0][0] / t for t in lams])
    spread = float((ratios.max() - ratios.min()) / abs(ratios.mean()))
    limit = boundary_limit_formula(n, a, rho)
    return {
        "lams": lams,
        "ratios": ratios,
        "spread": spread,
        "limit": limit,
        "limit_rel_diff": float(abs(ratios[0] - limit) / abs(limit)),
    }


def radial_convolution(f, g, d: int, rhos, *, width_f: float, width_g: float,
                       order: int = 12, angles: int = 64) -> np.ndarray:
    """(f * g)(rho) for radial densities on R^d, given as functions of |y|.

    Polar coordinates centred on the narrower factor ``f``.  The angular
    average uses Gauss-Gegenbauer nodes in cos(theta) (d >= 3) or the
    midpoint rule in theta (d = 2, periodic, spectrally accurate).
    """
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    if width_f > width_g:
        f, g, width_f, width_g = g, f, width_g, width_f
    r_far = 1e6 * width_g
    uniform = np.arange(0.0, rhos.max() + 12 * width_g, width_g / 2)
    geometric = width_f * 2.0 ** np.arange(-24, math.ceil(math.log2(r_far / width_f)) + 1)
    edges = np.unique(np.concatenate([uniform, geometric]))
    r, wr = quad.panel_rule(edges, order)
    if d == 2:
        theta = (np.arange(angles) + 0.5) * math.pi / angles
        cos_t = np.cos(theta)
        w_ang = np.full(angles, 1.0 / angles)  # mean over the circle
    else:
        alpha = (d - 2) / 2
        cos_t, w_ang = sp.roots_gegenbauer(angles, alpha)
        w_ang = w_ang / w_ang.sum()
    fr = np.asarray(f(r)) * r ** (d - 1) * wr * sphere_area(d)
    out = np.empty(len(rhos))
    for i, rho in enumerate(rhos):
        dist = np.sqrt(np.maximum(rho**2 + r[:, None] ** 2 - 2 * rho * r[:, None] * cos_t, 0.0))
        gvals = np.asarray(g(dist.ravel())).reshape(dist.shape)
        out[i] = float(fr @ (gvals @ w_ang))
    return out


def _rep_fn(g: Geometry, nodes: int = 4001):
    """Representation-method kernel as a fast radial function.

    P(rho) is tabulated once on t = rho/(rho + lam) in [0, 1) and
    interpolated by a cubic spline in t; beyond the table the exact
    rho^{-(2n-2)} tail law is matched to the last tabulated value.
    """
    from scipy.interpolate import CubicSpline

    lam = g.lam
    t = np.linspace(0.0, 0.999, nodes)
    rho = lam * t / (1 - t)
    vals = rep_values(g, rho)[0]
    spline = CubicSpline(t, vals, bc_type=("clamped", "not-a-knot"))
    rho_end, val_end = rho[-1], vals[-1]
    power = -(2 * g.n - 2)

    def f(r):
        r = np.asarray(r, dtype=float)
        inside = r <= rho_end
        tt = np.where(inside, r / (r + lam), 0.0)
        tail = val_end * (np.maximum(r, rho_end) / rho_end) ** power
        return np.where(inside, spline(tt), tail)

    return f


def semigroup_residual(a: float, b: float, x: float, n: int, grid=None, **kw) -> dict:
    """max |P_{a,x} - P_{a,b} * P_{b,x}| over a rho grid (a = 0 uses P_{H^n})."""
    if not 0 <= a < b < x:
        raise ValueError("need 0 <= a < b < x")
    grid = np.linspace(0.0, 4.0 * (x - a), 9) if grid is None else np.asarray(grid, float)
    d = n - 1
    outer = Geometry(n, b, x)
    g_fn = _rep_fn(outer)
    if a == 0:
        f_fn = lambda r: kernel_hn(b, r, n)  # noqa: E731
        target = kernel_hn(x, grid, n)
        width_f = b
    else:
        f_fn = _rep_fn(Geometry(n, a, b))
        target = rep_values(Geometry(n, a, x), grid)[0]
        width_f = b - a
    conv = radial_convolution(f_fn, g_fn, d, grid, width_f=width_f, width_g=x - b, **kw)
    resid = float(np.max(np.abs(conv - target)))
    peak = float(np.max(target))
    return {"grid": grid, "convolution": conv, "target": target, "residual": resid,
            "peak": peak, "relative": resid / peak}


def global_limit_residual(x: float, n: int, a_sequence, rho_grid=None) -> list[dict]:
    """sup over a rho grid of |P_a(x, .) - P_{H^n}(x, .)| for each a."""
    rho_grid = np.linspace(0.0, 5.0 * x, 101) if rho_grid is None else np.asarray(rho_grid, float)
    target = kernel_hn(x, rho_grid, n)
    peak = float(np.max(target))
    out = []
    for a in a_sequence:
        if not 0 < a < x:
            raise ValueError("each a must lie in (0, x)")
        vals = rep_values(Geometry(n, a, x), rho_grid)[0]
        diff = np.abs(vals - target)
        k = int(np.argmax(diff))
        out.append({"a": float(a), "sup": float(diff[k]), "relative": float(diff[k]) / peak,
                    "argmax_rho": float(rho_grid[k]), "peak": peak})
    return out


def vanishing_moments(g: Geometry, include_nonzero: bool = True) -> list[dict]:
    """int kappa^j w dv relative to int kappa^j |w| dv.

    Even n: j = 2 .. n/2 - 1 (should vanish) and j = n/2 (should not).
    Odd n: j = 2 .. (n-1)/2 (should vanish).
    """
    n, lam, a = g.n, g.lam, g.a
    if n % 2 == 0:
        if n <= 4:
            raise ValueError("vanishing moments need even n > 4")
        js = list(range(2, n // 2)) + ([n // 2] if include_nonzero else [])
        vanishing = set(range(2, n // 2))
    else:
        if n <= 3:
            raise ValueError("vanishing moments need odd n > 3")
        js = list(range(2, (n - 1) // 2 + 1))
        vanishing = set(js)
    ev = w_evaluator(g)
    v, wt, wv = ev.table()
    kappa = (2 * lam + a * v) * (a * v)
    out = []
    for j in js:
        value = float(np.dot(wt * wv, kappa**j))
        scale = float(np.dot(wt * np.abs(wv), kappa**j))
        out.append({"j": j, "value": value, "scale": scale, "relative": abs(value) / scale,
                     "should_vanish": j in vanishing})
    return out


def remainder_limit(g: Geometry, l: int, rhos) -> dict:
    """rho^{2l} int w [Phi(u) - sum_{2 <= j < l} (-1)^j (s)_j/j! u^j] dv versus
    its predicted limit (-1)^l (s)_l/l! int kappa^l w dv."""
    s, lam, a = g.s, g.lam, g.a
    ev = w_evaluator(g)
    v, wt, wv = ev.table()
    kappa = (2 * lam + a * v) * (a * v)
    rhos = np.atleast_1d(np.asarray(rhos, dtype=float))
    vals = []
    for rho in rhos:
        u = kappa / (lam**2 + rho**2)
        rem = phi(u, s)
        for j in range(2, l):
            rem = rem - (-1) ** j * sp.poch(s, j) / math.factorial(j) * u**j
        vals.append(rho ** (2 * l) * float(np.dot(wt * wv, rem)))
    limit = (-1) ** l * sp.poch(s, l) / math.factorial(l) * float(np.dot(wt * wv, kappa**l))
    return {"rhos": rhos, "values": np.array(vals), "limit": limit}


def kernel_mass(g: Geometry) -> float:
    """Total mass int P_a(x, rho) |S^{n-2}| rho^{n-2} d rho."""
    scale = max(g.lam, 1e-300)
    edges = np.concatenate([[0.0], scale * 2.0 ** np.arange(-30, 60)])
    r, wr = quad.panel_rule(edges)
    vals = np.concatenate([rep_values(g, r[i : i + 1024])[0] for i in range(0, len(r), 1024)])
    return float(np.dot(wr * vals, r ** (g.n - 2))) * sphere_area(g.n - 1)


def bin_masses(g: Geometry, edges, method: str | None = None) -> np.ndarray:
    """Analytic probability of |y| in each bin.

    Each bin is cut into Gauss-Legendre panels no wider than max(lambda, left
    end), so wide outer bins are integrated on geometrically growing panels.
    """
    edges = np.asarray(edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
        raise ValueError("bin edges must be nonnegative and strictly increasing")
    cuts, owner = [edges[0]], []
    for i, hi in enumerate(edges[1:]):
        cur = cuts[-1]
        while cur < hi:
            nxt = min(hi, cur + max(g.lam, cur))
            if hi - nxt < 1e-12 * hi:
                nxt = hi
            cuts.append(nxt)
            owner.append(i)
            cur = nxt
    r, wr = quad.panel_rule(cuts, 24)
    vals = np.array([kv.value for kv in kernel_values(g, r, method)])
    dens = (wr * vals * r ** (g.n - 2)).reshape(len(owner), -1).sum(axis=1) * sphere_area(g.n - 1)
    return np.bincount(owner, weights=dens, minlength=len(edges) - 1)
