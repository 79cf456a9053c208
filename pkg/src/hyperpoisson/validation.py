"""Property suite behind ``hyperpoisson validate``.

Every check yields a :class:`CheckResult` with a measured value and the
threshold it was held to.  Groups can be run selectively.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterator

import numpy as np
from scipy import special as sp

from . import analysis, kernel, special, wfun
from .hyperbolic_bm import McConfig, mc_char_fn, mc_radial_density, simulate_exits
from .kernel import KernelQuery
from .quadrature import hankel_integral
from .wfun import Geometry
from .zeros import find_zeros, zero_count

__all__ = ["CheckResult", "DEFAULT_GROUPS", "GROUPS", "run_suite"]

PASS, FAIL, SKIP = "PASS", "FAIL", "SKIP"
MOMENT_GEOMETRIES = ((1.0, 1.5), (1.0, 2.0), (0.5, 3.0))
LAPLACE_POINTS = (0.5, 1.0, 2.0, 5.0, 10.0)
GRID_X = (1.2, 2.0)
GRID_RHO = (0.0, 0.5, 2.0, 5.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    group: str
    status: str
    measured: float
    threshold: float
    runtime: float

    def as_record(self) -> dict:
        return asdict(self)


def _check(name, group, measured, threshold, start, *, above: bool = False) -> CheckResult:
    measured = float(measured)
    ok = measured > threshold if above else measured <= threshold
    if math.isnan(measured):
        ok = False
    return CheckResult(name, group, PASS if ok else FAIL, measured, float(threshold),
                       time.perf_counter() - start)


def _rel(a, b) -> float:
    return abs(a - b) / abs(b)


# --- groups -----------------------------------------------------------------


def check_special(ns) -> Iterator[CheckResult]:
    t = time.perf_counter()
    u = np.geomspace(0.1, 50, 400)
    worst = 0.0
    for nu in sorted({(n - 1) / 2 for n in ns}):
        lhs = sp.iv(nu - 1, u) * sp.kv(nu, u) + sp.iv(nu, u) * sp.kv(nu - 1, u)
        worst = max(worst, float(np.max(np.abs(lhs * u - 1))))
    yield _check("wronskian", "special", worst, 1e-10, t)

    t = time.perf_counter()
    z = np.geomspace(0.1, 20, 200)
    worst = 0.0
    for n in sorted({n for n in ns if n % 2 == 0} | {4, 6}):
        nu, _, s = special.orders(n)
        lhs = special.d_const(n) * special.bessel_ke(nu, z) * z**nu
        worst = max(worst, float(np.max(np.abs(lhs / special.m_s_poly(int(s), z) - 1))))
    yield _check("m_s_identity", "special", worst, 1e-10, t)

    t = time.perf_counter()
    worst = 0.0
    for nu in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
        for y in (0.1, 1.0, 5.0, 20.0):
            up = special.bessel_k_complex(nu, special.CutComplex(-y, 0.0, 1))
            dn = special.bessel_k_complex(nu, special.CutComplex(-y, 0.0, -1))
            worst = max(worst, abs(np.conj(up) - dn) / abs(up))
    yield _check("cut_conjugation", "special", worst, 1e-14, t)

    t = time.perf_counter()
    worst = 0.0
    u0 = 1e-6
    for nu in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0):
        k_law = special.bessel_k(nu, u0) * u0**nu / (2 ** (nu - 1) * math.gamma(nu))
        i_law = special.bessel_i(nu, u0) * u0 ** (-nu) * 2**nu * math.gamma(nu + 1)
        worst = max(worst, abs(k_law - 1), abs(i_law - 1))
    yield _check("small_argument_laws", "special", worst, 1e-4, t)


def check_zeros(ns) -> Iterator[CheckResult]:
    for n in ns:
        if n < 3:
            continue
        t = time.perf_counter()
        zs = find_zeros(n)
        ok_count = len(zs) == zero_count(n)
        ok_half = all(z.real < 0 for z in zs)
        measured = zs.residual if ok_count and ok_half else float("inf")
        yield _check(f"zeros[n={n}]", "zeros", measured, 1e-12, t)


def check_moments(ns) -> Iterator[CheckResult]:
    for n in ns:
        for a, x in MOMENT_GEOMETRIES:
            t = time.perf_counter()
            g = Geometry(n, a, x)
            s, r, lam = g.s, g.ratio, g.lam
            m0, m1, m2 = (wfun.w_moment(g, k) for k in (0, 1, 2))
            errs = [
                _rel(m0, s * (s + 1) * r**s / (2 * x * a)),
                _rel(-lam * a * m1, 1 - r**s),
                abs(a**2 / 2 * m2 - 1),
            ]
            yield _check(f"moments[n={n},a={a:g},x={x:g}]", "moments", max(errs), 1e-7, t)


def check_laplace(ns) -> Iterator[CheckResult]:
    for n in ns:
        for a, x in MOMENT_GEOMETRIES:
            t = time.perf_counter()
            g = Geometry(n, a, x)
            lap = wfun.w_evaluator(g).laplace(LAPLACE_POINTS)
            f = wfun.f_lambda(g, LAPLACE_POINTS)
            err = float(np.max(np.abs(lap - f) / (1 + np.abs(f))))
            yield _check(f"laplace[n={n},a={a:g},x={x:g}]", "laplace", err, 1e-7, t)


def check_cross(ns) -> Iterator[CheckResult]:
    for n in ns:
        for x in GRID_X:
            g = Geometry(n, 1.0, x)
            if n in (3, 4, 6):
                t = time.perf_counter()
                worst = max(
                    _rel(kernel.poisson_kernel_rep(KernelQuery(g, r)).value,
                         kernel.poisson_kernel_closed(KernelQuery(g, r)).value)
                    for r in GRID_RHO
                )
                yield _check(f"rep_vs_closed[n={n},x={x:g}]", "cross", worst, 1e-8, t)
            t = time.perf_counter()
            worst = max(
                _rel(kernel.poisson_kernel_rep(KernelQuery(g, r)).value,
                     kernel.poisson_kernel_hankel(KernelQuery(g, r)).value)
                for r in GRID_RHO
            )
            yield _check(f"rep_vs_hankel[n={n},x={x:g}]", "cross", worst, 1e-6, t)
    t = time.perf_counter()
    res = hankel_integral(lambda r: r**2 * sp.kv(1, np.maximum(r, 1e-300)), 0.0, 1.0)
    yield _check("hankel_test_integral", "cross", abs(res.value - 0.5) / 0.5, 1e-10, t)


def check_homogeneity(ns) -> Iterator[CheckResult]:
    for n in ns:
        t = time.perf_counter()
        g = Geometry(n, 1.0, 1.5)
        rhos = np.array(GRID_RHO)
        base = kernel.rep_values(g, rhos)[0]
        scaled = kernel.rep_values(g.scaled(2.0), 2 * rhos)[0]
        err = float(np.max(np.abs(scaled * 2.0 ** (n - 1) / base - 1)))
        yield _check(f"homogeneity[n={n}]", "homogeneity", err, 1e-12, t)


def check_normalization(ns) -> Iterator[CheckResult]:
    for n in ns:
        t = time.perf_counter()
        mass = analysis.kernel_mass(Geometry(n, 1.0, 1.5))
        yield _check(f"normalization[n={n}]", "normalization", abs(mass - 1), 1e-6, t)


def check_vanishing(ns) -> Iterator[CheckResult]:
    for n in ns:
        if n <= 4:
            continue
        t = time.perf_counter()
        for m in analysis.vanishing_moments(Geometry(n, 1.0, 2.0)):
            if m["should_vanish"]:
                yield _check(f"vanishing[n={n},j={m['j']}]", "vanishing", m["relative"], 1e-6, t)
            else:
                yield _check(f"nonzero[n={n},j={m['j']}]", "vanishing", m["relative"], 1e-3, t,
                             above=True)
            t = time.perf_counter()


def check_asymptotics(ns) -> Iterator[CheckResult]:
    th = analysis.DEFAULTS
    for n in ns:
        t = time.perf_counter()
        fit = analysis.slope_rho_infinity(Geometry(n, 1.0, 2.0))
        yield _check(f"slope_rho[n={n}]", "asymptotics",
                     abs(fit.exponent - fit.expected) / abs(fit.expected), th.slope_rel, t)
        t = time.perf_counter()
        fit = analysis.slope_x_infinity(n, 1.0, 1.0)
        yield _check(f"slope_x[n={n}]", "asymptotics",
                     abs(fit.exponent - fit.expected) / abs(fit.expected), th.slope_rel, t)
        t = time.perf_counter()
        fit = analysis.boundary_blowup(1.0, n)
        yield _check(f"slope_blowup[n={n}]", "asymptotics",
                     abs(fit.exponent - fit.expected) / abs(fit.expected), th.slope_rel, t)
        yield _check(f"blowup_constant[n={n}]", "asymptotics",
                     _rel(fit.constant, analysis.blowup_constant(n)), th.blowup_rel, t)
        t = time.perf_counter()
        lin = analysis.boundary_linear(n, 1.0, 1.0)
        yield _check(f"linear_spread[n={n}]", "asymptotics", lin["spread"], th.linear_spread, t)


def check_semigroup(ns) -> Iterator[CheckResult]:
    t = time.perf_counter()
    res = analysis.semigroup_residual(1.0, 1.5, 2.0, 3)
    yield _check("semigroup[n=3,a=1,b=1.5,x=2]", "semigroup", res["relative"], 1e-3, t)
    t = time.perf_counter()
    res = analysis.semigroup_residual(0.0, 1.5, 2.0, 3)
    yield _check("semigroup[n=3,a=0,b=1.5,x=2]", "semigroup", res["relative"], 1e-3, t)


def check_global_limit(ns) -> Iterator[CheckResult]:
    t = time.perf_counter()
    rows = analysis.global_limit_residual(1.0, 3, (0.2, 0.1, 0.02))
    sups = [r["sup"] for r in rows]
    monotone = all(b < a for a, b in zip(sups, sups[1:]))
    yield _check("global_limit_monotone[n=3,x=1]", "global_limit", 0.0 if monotone else 1.0, 0.0, t)
    yield _check("global_limit_final[n=3,x=1]", "global_limit", rows[-1]["relative"], 1e-3, t)


def check_mc(ns, seed: int = 7, n_paths: int = 100_000) -> Iterator[CheckResult]:
    for n, a, x in ((3, 1.0, 1.5), (4, 1.0, 2.0)):
        cfg = McConfig(Geometry(n, a, x), dt=1e-4, n_paths=n_paths, seed=seed)
        t = time.perf_counter()
        samples = simulate_exits(cfg)
        for u in (0.5, 1.0, 2.0):
            est = mc_char_fn(cfg, u, samples)
            z = abs(est.value - kernel.fourier_transform(cfg.geometry, u)) / est.std_err
            yield _check(f"mc_char_fn[n={n},u={u:g}]", "mc", z, 3.0, t)
            t = time.perf_counter()
        if n == 4:
            edges = np.linspace(0, 6, 21)
            ests = mc_radial_density(cfg, edges, samples)
            masses = analysis.bin_masses(cfg.geometry, edges, "closed")
            widths = np.diff(edges)
            zs = [abs(e.value * w - m) / (e.std_err * w) for e, m, w in zip(ests, masses, widths)]
            yield _check(f"mc_histogram[n={n}]", "mc", max(zs), 3.0, t)


GROUPS: dict[str, Callable] = {
    "special": check_special,
    "zeros": check_zeros,
    "moments": check_moments,
    "laplace": check_laplace,
    "cross": check_cross,
    "homogeneity": check_homogeneity,
    "normalization": check_normalization,
    "vanishing": check_vanishing,
    "asymptotics": check_asymptotics,
    "semigroup": check_semigroup,
    "global_limit": check_global_limit,
    "mc": check_mc,
}
DEFAULT_GROUPS = (
    "special", "zeros", "moments", "laplace", "cross", "homogeneity",
    "normalization", "vanishing", "asymptotics", "semigroup",
)


def run_suite(groups=DEFAULT_GROUPS, ns=(3, 4, 5, 6), on_result=None) -> list[CheckResult]:
    """Run the named groups in order; ``on_result`` sees each result as it lands."""
    unknown = [g for g in groups if g not in GROUPS]
    if unknown:
        raise ValueError(f"unknown check groups: {', '.join(unknown)}")
    out = []
    for name in groups:
        for res in GROUPS[name](tuple(ns)):
            out.append(res)
            if on_result is not None:
                on_result(res)
    return out
