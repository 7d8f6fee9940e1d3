"""Sample paths of the Levy process with time-one exponent g_F.

Every path owns an independent Philox stream keyed by ``SeedSequence(seed,
spawn_key=(path_index,))``, and normal variates come from the inverse normal
CDF, so output depends only on (seed, path index, spec, triplet).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

from .levy import LevyTriplet

# a step may hold two or more jumps with probability at most this
RESOLVE_PROB = 1e-3


@dataclass(frozen=True)
class PathSpec:
    t_max: float = 1.0
    n_steps: int = 1000
    seed: int = 0
    n_paths: int = 1
    resolve_jumps: bool = False

    def __post_init__(self):
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.n_steps < 1 or self.n_paths < 1:
            raise ValueError("n_steps and n_paths must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True)
class Path:
    path_id: int
    times: np.ndarray
    values: np.ndarray
    n_jumps: int

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.values)


def path_rng(seed: int, path_id: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(path_id,))))


def _open_uniforms(rng: np.random.Generator, n: int) -> np.ndarray:
    # (k + 1/2) / 2^53 is never 0 or 1, so ndtri stays finite
    return (rng.integers(0, 1 << 53, size=n, dtype=np.int64) + 0.5) * 2.0**-53


def resolved_steps(triplet: LevyTriplet, spec: PathSpec) -> int:
    """Smallest multiple of ``spec.n_steps`` whose steps hold two jumps with probability < RESOLVE_PROB."""
    rate = triplet.total_mass
    if rate == 0:
        return spec.n_steps
    # P(K >= 2) = 1 - e^{-x}(1 + x) <= x^2 / 2 for x = rate * dt
    max_dt = math.sqrt(2 * RESOLVE_PROB) / rate
    factor = max(1, math.ceil(spec.t_max / (max_dt * spec.n_steps)))
    return spec.n_steps * factor


def _one_path(triplet: LevyTriplet, spec: PathSpec, path_id: int, n_steps: int) -> Path:
    rng = path_rng(spec.seed, path_id)
    dt = spec.t_max / n_steps
    inc = np.full(n_steps, triplet.drift * dt)
    if triplet.gaussian_cov > 0:
        inc += math.sqrt(triplet.gaussian_cov * dt) * ndtri(_open_uniforms(rng, n_steps))
    rate = triplet.total_mass
    n_jumps = 0
    if rate > 0:
        counts = rng.poisson(rate * dt, size=n_steps)
        n_jumps = int(counts.sum())
        if n_jumps:
            cdf = np.cumsum(triplet.masses) / rate
            pick = np.searchsorted(cdf, _open_uniforms(rng, n_jumps), side="right")
            pick = np.minimum(pick, len(cdf) - 1)
            steps = np.repeat(np.arange(n_steps), counts)
            inc += np.bincount(steps, weights=triplet.locations[pick], minlength=n_steps)
    values = np.concatenate([[0.0], np.cumsum(inc)])
    times = np.linspace(0.0, spec.t_max, n_steps + 1)
    return Path(path_id, times, values, n_jumps)


def sample_path(triplet: LevyTriplet, spec: PathSpec, workers: int = 1) -> list[Path]:
    """``spec.n_paths`` trajectories on a uniform grid, ordered by path id."""
    n_steps = resolved_steps(triplet, spec) if spec.resolve_jumps else spec.n_steps
    if workers > 1 and spec.n_paths > 1:
        with ThreadPoolExecutor(workers) as pool:
            return list(pool.map(lambda i: _one_path(triplet, spec, i, n_steps), range(spec.n_paths)))
    return [_one_path(triplet, spec, i, n_steps) for i in range(spec.n_paths)]


def unit_increments(triplet: LevyTriplet, n: int, seed: int = 0) -> np.ndarray:
    """``n`` independent copies of X(1), taken as the unit increments of one long path."""
    (path,) = sample_path(triplet, PathSpec(t_max=float(n), n_steps=n, seed=seed))
    return path.increments


def empirical_cf(samples, u_grid) -> tuple[np.ndarray, float]:
    """``mean(exp(i u x))`` per grid point and the standard-error radius ``1/sqrt(N)``."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empirical characteristic function of an empty sample")
    u = np.asarray(u_grid, dtype=float)
    vals = np.array([np.mean(np.exp(1j * uu * x)) for uu in u.ravel()]).reshape(u.shape)
    return vals, 1.0 / math.sqrt(x.size)


def quadratic_variation(path: Path, truncate: bool = True) -> float:
    """Realized variance of the path; with ``truncate`` only the continuous part.

    Truncation drops increments larger than five local standard deviations,
    the scale being taken from bipower variation, which jumps do not inflate.
    """
    d = path.increments
    if not truncate:
        return float(np.sum(d**2))
    if d.size < 2:
        return float(np.sum(d**2))
    dt = path.times[1] - path.times[0]
    bipower = (math.pi / 2) * float(np.sum(np.abs(d[1:]) * np.abs(d[:-1])))
    sigma2 = bipower / (path.times[-1] - path.times[0])
    thr = 5.0 * math.sqrt(max(sigma2, 0.0) * dt)
    if thr == 0:
        return 0.0
    return float(np.sum(d[np.abs(d) <= thr] ** 2))
