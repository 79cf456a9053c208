"""Monte Carlo oracle for the exit distribution of hyperbolic Brownian motion.

In the half-space model the height solves log X_n(t) = log x + B_n(t) - (n-1)t
and, given the height path, the horizontal exit offset is centred Gaussian
with covariance 2 A I_{n-1}, A = int_0^tau X_n(s)^2 ds (variances follow the
full-Laplacian convention, Var B(t) = 2t).  Only log X_n is time-stepped; it
is stepped exactly, so the discretisation error comes from locating the exit
time and from the trapezoid rule for A.

Random streams: a ``SeedSequence(seed)`` is spawned once per block of
``CHUNK_PATHS`` paths, each block draws from its own Philox generator, so the
samples do not depend on how blocks are distributed over threads.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .wfun import Geometry

__all__ = [
    "CHUNK_PATHS",
    "THREADS_ENV",
    "ExitSample",
    "ExitSamples",
    "McConfig",
    "McEstimate",
    "default_threads",
    "mc_char_fn",
    "mc_limit_law",
    "mc_radial_density",
    "simulate_exit",
    "simulate_exits",
]

CHUNK_PATHS = 4096
THREADS_ENV = "HYPERPOISSON_THREADS"
DEFAULT_DT = 1e-4
STEP_BLOCK = 256


def default_threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return 1
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return value


@dataclass(frozen=True)
class McConfig:
    geometry: Geometry
    dt: float = DEFAULT_DT
    n_paths: int = 100_000
    seed: int = 0
    bridge_correction: bool = True
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ValueError("n_paths must be a positive integer")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an integer in [0, 2^64)")
        if self.geometry.n < 2:
            raise ValueError("dimension must be >= 2")


@dataclass(frozen=True)
class ExitSample:
    tau: float
    a_func: float
    y: np.ndarray


@dataclass(frozen=True)
class ExitSamples:
    """Columnar exit data for many paths (``y`` has shape (paths, n-1))."""

    tau: np.ndarray
    a_func: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.tau)

    def __getitem__(self, i) -> ExitSample:
        return ExitSample(float(self.tau[i]), float(self.a_func[i]), self.y[i].copy())

    @property
    def radius(self) -> np.ndarray:
        return np.sqrt(np.sum(self.y**2, axis=1))


@dataclass(frozen=True)
class McEstimate:
    value: float
    std_err: float
    n_effective: int


def _simulate_block(cfg: McConfig, rng: np.random.Generator, count: int):
    """Advance ``count`` paths STEP_BLOCK steps at a time until all have exited."""
    g = cfg.geometry
    dt = cfg.dt
    drift = -(g.n - 1) * dt
    sd = math.sqrt(2 * dt)
    la = math.log(g.a)
    tau = np.zeros(count)
    afun = np.zeros(count)
    level = np.full(count, math.log(g.x))
    steps = np.zeros(count, dtype=np.int64)
    alive = np.arange(count)
    k = STEP_BLOCK
    while alive.size:
        m = alive.size
        path = level[alive, None] + np.cumsum(drift + sd * rng.standard_normal((m, k)), axis=1)
        prev = np.empty_like(path)
        prev[:, 0] = level[alive]
        prev[:, 1:] = path[:, :-1]
        d0 = prev - la
        d1 = path - la
        hit = d1 <= 0
        if cfg.bridge_correction:
            # bridge of variance 2 dt: P(min < la | endpoints) = exp(-d0 d1 / dt)
            unif = rng.random((m, k))
            hit |= unif < np.exp(-np.maximum(d0 * d1, 0.0) / dt)
        exited = hit.any(axis=1)
        first = np.where(exited, np.argmax(hit, axis=1), k)
        e_prev = np.exp(2 * prev)
        incr = 0.5 * (e_prev + np.exp(2 * path)) * dt
        done = np.concatenate([np.zeros((m, 1)), np.cumsum(incr, axis=1)], axis=1)
        rows = np.arange(m)
        afun[alive] += done[rows, first]
        tau[alive] += first * dt
        ex = np.nonzero(exited)[0]
        j = first[ex]
        a0, a1 = d0[ex, j], d1[ex, j]
        # exit placed linearly along the step
        frac = a0 / (a0 + np.abs(a1))
        afun[alive[ex]] += 0.5 * (e_prev[ex, j] + g.a**2) * frac * dt
        tau[alive[ex]] += frac * dt
        stay = ~exited
        level[alive[stay]] = path[stay, -1]
        steps[alive[stay]] += k
        over = alive[stay][steps[alive[stay]] >= cfg.max_steps]
        if over.size:
            # numeric guard only: restart the offending paths from x
            tau[over] = 0.0
            afun[over] = 0.0
            level[over] = math.log(g.x)
            steps[over] = 0
        alive = alive[stay]
    y = np.sqrt(2 * afun)[:, None] * rng.standard_normal((count, g.n - 1))
    return tau, afun, y


def _block_sizes(n_paths: int):
    full, rest = divmod(n_paths, CHUNK_PATHS)
    return [CHUNK_PATHS] * full + ([rest] if rest else [])


def simulate_exits(cfg: McConfig, threads: int | None = None) -> ExitSamples:
    """Simulate ``cfg.n_paths`` exits; bit-identical for a given config."""
    sizes = _block_sizes(cfg.n_paths)
    streams = np.random.SeedSequence(cfg.seed).spawn(len(sizes))

    def run(i):
        rng = np.random.Generator(np.random.Philox(streams[i]))
        return _simulate_block(cfg, rng, sizes[i])

    threads = threads or default_threads()
    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(run, range(len(sizes))))
    else:
        blocks = [run(i) for i in range(len(sizes))]
    tau, afun, y = (np.concatenate(parts) for parts in zip(*blocks))
    return ExitSamples(tau, afun, y)


@lru_cache(maxsize=8)
def _cached_exits(cfg: McConfig) -> ExitSamples:
    return simulate_exits(cfg)


def simulate_exit(cfg: McConfig, rng: np.random.Generator) -> ExitSample:
    """One exit drawn from the caller's generator."""
    tau, afun, y = _simulate_block(cfg, rng, 1)
    return ExitSample(float(tau[0]), float(afun[0]), y[0])


def _mean_and_err(values: np.ndarray) -> McEstimate:
    n = len(values)
    mean = math.fsum(values) / n
    if n < 2:
        return McEstimate(mean, 0.0, n)
    var = math.fsum((values - mean) ** 2) / (n - 1)
    return McEstimate(mean, math.sqrt(var / n), n)


def mc_char_fn(cfg: McConfig, u_norm: float, samples: ExitSamples | None = None) -> McEstimate:
    """Sample mean of exp(-u^2 A), an estimate of the kernel's Fourier transform."""
    if not u_norm >= 0:
        raise ValueError("u_norm must be nonnegative")
    samples = samples if samples is not None else _cached_exits(cfg)
    if u_norm == 0:
        return McEstimate(1.0, 0.0, len(samples))
    return _mean_and_err(np.exp(-(u_norm**2) * samples.a_func))


def mc_radial_density(
    cfg: McConfig, bin_edges, samples: ExitSamples | None = None
) -> list[McEstimate]:
    """Per-bin density of |y| (probability / bin width) with binomial errors.

    Empty bins get the one-sided 95% upper bound 3/N (rule of three) as their
    error.
    """
    edges = np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
        raise ValueError("bin edges must be nonnegative and strictly increasing")
    samples = samples if samples is not None else _cached_exits(cfg)
    counts, _ = np.histogram(samples.radius, bins=edges)
    total = len(samples)
    widths = np.diff(edges)
    out = []
    for c, width in zip(counts, widths):
        p = c / total
        err = math.sqrt(p * (1 - p) / total) if c else 3.0 / total
        out.append(McEstimate(p / width, err / width, total))
    return out


def mc_limit_law(
    x: float,
    n: int,
    a_values,
    bin_edges,
    *,
    n_paths: int = 20_000,
    dt: float = DEFAULT_DT,
    seed: int = 0,
) -> list[list[McEstimate]]:
    """Radial histograms at small boundary heights a (one list per a)."""
    out = []
    for a in a_values:
        if not a <= x / 10:
            raise ValueError("the limit-law surrogate needs a <= x/10")
        cfg = McConfig(Geometry(n, a, x), dt=dt, n_paths=n_paths, seed=seed)
        out.append(mc_radial_density(cfg, bin_edges, simulate_exits(cfg)))
    return out
