"""Zeros of ``xi_F(1/2 - iz)`` on the real axis and the central multiplicity.

Scanning assumes GRH for the instance: every nontrivial zero is a real
ordinate ``gamma`` and shows up as a sign change of a real-valued rotation of
``xi_F(1/2 + it)``.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.special import digamma, loggamma

from .lfunc import DEFAULT_TOL, SelbergData, get_instance, log_prefactor, xi_eval

log = logging.getLogger(__name__)

WORKERS_ENV = "SELBERG_LEVY_WORKERS"
BISECT_WIDTH = 1e-9
DEFAULT_GRID_STEP = 0.1
RING_RADIUS = 0.05
RING_POINTS = 64
CENTRAL_TOL = 1e-8
MAX_CENTRAL_ORDER = 6


class MissedZeroError(RuntimeError):
    def __init__(self, message: str, interval: tuple[float, float]):
        super().__init__(message)
        self.interval = interval


class IndeterminateMultiplicity(ArithmeticError):
    pass


class UnsupportedInstance(ValueError):
    pass


class ZeroTableError(ValueError):
    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class ZeroList:
    ordinates: np.ndarray
    multiplicities: np.ndarray
    height_bound: float
    symmetric: bool = True
    provenance: str = "computed"
    flagged: tuple[float, ...] = ()

    def __post_init__(self):
        o = np.asarray(self.ordinates, dtype=float)
        m = np.asarray(self.multiplicities, dtype=int)
        if o.shape != m.shape:
            raise ValueError("ordinates and multiplicities must align")
        if o.size:
            if np.any(np.diff(o) <= 0):
                raise ValueError("ordinates must be strictly ascending")
            if o[0] <= 0 or o[-1] > self.height_bound:
                raise ValueError("ordinates must lie in (0, T]")
            if np.any(m < 1):
                raise ValueError("multiplicities must be positive")
        o.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "ordinates", o)
        object.__setattr__(self, "multiplicities", m)

    def __len__(self) -> int:
        return len(self.ordinates)

    @property
    def total(self) -> int:
        """Number of positive zeros counted with multiplicity."""
        return int(self.multiplicities.sum())

    def truncate(self, T: float) -> "ZeroList":
        keep = self.ordinates <= T
        return ZeroList(
            self.ordinates[keep],
            self.multiplicities[keep],
            min(T, self.height_bound) if self.provenance == "computed" else T,
            self.symmetric,
            self.provenance,
            tuple(f for f in self.flagged if f <= T),
        )

    def merge(self, other: "ZeroList") -> "ZeroList":
        """Union with multiplicities added where ordinates coincide (within the bisection width)."""
        T = min(self.height_bound, other.height_bound)
        a, b = self.truncate(T), other.truncate(T)
        pts = sorted(
            [(g, m) for g, m in zip(a.ordinates, a.multiplicities)]
            + [(g, m) for g, m in zip(b.ordinates, b.multiplicities)]
        )
        ords: list[float] = []
        mults: list[int] = []
        for g, m in pts:
            if ords and abs(g - ords[-1]) <= 10 * BISECT_WIDTH:
                mults[-1] += int(m)
            else:
                ords.append(float(g))
                mults.append(int(m))
        prov = a.provenance if a.provenance == b.provenance else "mixed"
        return ZeroList(
            np.array(ords), np.array(mults, dtype=int), T, a.symmetric and b.symmetric, prov,
            a.flagged + b.flagged,
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["gamma", "multiplicity"])
            for g, m in zip(self.ordinates, self.multiplicities):
                w.writerow([f"{g:.15g}", int(m)])


@dataclass(frozen=True)
class CentralData:
    m0: int
    residual_scale: float
    taylor: np.ndarray = field(repr=False)  # xi_F Taylor coefficients at 1/2, c_j
    radius: float = RING_RADIUS


# ---------------------------------------------------------------------------
# real-valued rotation on the critical line
# ---------------------------------------------------------------------------


def _rotation(F: SelbergData) -> complex:
    sign = F.self_dual_sign
    if sign is None:
        raise UnsupportedInstance(
            f"{F.name}: only self-dual instances (omega = +-1) have a real critical-line function"
        )
    return 1.0 if sign == 1 else 1j


def real_line_function(F: SelbergData, t, scaled: bool = False, tol: float = DEFAULT_TOL):
    """``xi_F(1/2 + it)`` made real: divided by i when omega = -1.

    With ``scaled=True`` the result is divided by the positive envelope
    ``|s^m (s-1)^m Q^s prod Gamma(...)|`` so it neither underflows nor
    overflows; zeros and signs are unchanged.
    """
    rot = _rotation(F)
    t = np.asarray(t, dtype=float)
    s = 0.5 + 1j * t
    if scaled:
        lp = log_prefactor(F, s)
        val = np.exp(1j * lp.imag) * F.kernel(s, tol) / rot
    else:
        val = xi_eval(F, s, tol) / rot
    return val.real


# ---------------------------------------------------------------------------
# counting
# ---------------------------------------------------------------------------


def theta(F: SelbergData, t) -> np.ndarray:
    """Continuous phase of ``Q^s prod Gamma(lam s + mu)`` along s = 1/2 + it, zero at t = 0."""
    t = np.asarray(t, dtype=float)
    s = 0.5 + 1j * t
    val = t * math.log(F.Q)
    for lam, mu in F.gamma_factors:
        val = val + (loggamma(lam * s + mu) - loggamma(lam * 0.5 + mu)).imag
    return val


def counting_estimate(F: SelbergData, T, m0: int = 0) -> np.ndarray:
    """Smooth part of the number of zeros with ``0 < gamma <= T`` (with multiplicity)."""
    return theta(F, T) / math.pi + F.m_F - m0 / 2.0


def zero_density(F: SelbergData, t) -> np.ndarray:
    """Derivative of :func:`counting_estimate` in t."""
    t = np.asarray(t, dtype=float)
    s = 0.5 + 1j * t
    val = math.log(F.Q) + 0.0 * t
    for lam, mu in F.gamma_factors:
        val = val + lam * digamma(lam * s + mu).real
    return val / math.pi


def tail_integral(F: SelbergData, T: float, f) -> float:
    """``int_T^inf f(u) dN(u)`` with the smooth zero density."""
    val, _ = integrate.quad(lambda u: f(u) * float(zero_density(F, u)), T, np.inf, limit=200)
    return val


# ---------------------------------------------------------------------------
# scanning
# ---------------------------------------------------------------------------


def _workers(workers: int | None) -> int:
    if workers is not None:
        return max(1, workers)
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def _evaluate(F: SelbergData, t: np.ndarray, workers: int) -> np.ndarray:
    if workers == 1 or t.size < 512:
        return real_line_function(F, t, scaled=True)
    chunks = np.array_split(t, workers * 4)
    with ThreadPoolExecutor(workers) as pool:
        parts = list(pool.map(lambda c: real_line_function(F, c, scaled=True), chunks))
    return np.concatenate(parts)


def _bisect(F: SelbergData, lo: np.ndarray, hi: np.ndarray, flo: np.ndarray) -> np.ndarray:
    """Refine every bracket to width ``BISECT_WIDTH``, all brackets at once.

    Illinois false-position steps, with a plain bisection every third pass so
    the width is guaranteed to halve regardless of curvature.
    """
    lo, hi, flo = lo.copy(), hi.copy(), flo.copy()
    fhi = real_line_function(F, hi, scaled=True) if lo.size else flo.copy()
    side = np.zeros(lo.size, dtype=int)
    it = 0
    while lo.size and np.max(hi - lo) > BISECT_WIDTH:
        it += 1
        if it % 3 == 0:
            mid = 0.5 * (lo + hi)
        else:
            denom = fhi - flo
            mid = np.where(denom != 0, hi - fhi * (hi - lo) / np.where(denom != 0, denom, 1.0), 0.5 * (lo + hi))
            mid = np.clip(mid, lo + 0.01 * (hi - lo), hi - 0.01 * (hi - lo))
        fm = real_line_function(F, mid, scaled=True)
        left = np.sign(fm) == np.sign(flo)  # root lies in [mid, hi]
        hit = fm == 0
        # Illinois: halve the stale endpoint value when the same side moves twice
        fhi = np.where(left & (side == 1), 0.5 * fhi, fhi)
        flo = np.where(~left & (side == -1), 0.5 * flo, flo)
        lo, flo = np.where(left, mid, lo), np.where(left, fm, flo)
        hi, fhi = np.where(left, hi, mid), np.where(left, fhi, fm)
        side = np.where(left, 1, -1)
        lo, hi = np.where(hit, mid, lo), np.where(hit, mid, hi)
    return 0.5 * (lo + hi)


def _probe_minima(F: SelbergData, t: np.ndarray, z: np.ndarray, refine: int = 20):
    """Refine around local minima of |Z| that show no sign change.

    Returns the new sign-change brackets found and touch points where |Z|
    collapses without changing sign.
    """
    a = np.abs(z)
    idx = np.nonzero((a[1:-1] < a[:-2]) & (a[1:-1] < a[2:]))[0] + 1
    idx = idx[(np.sign(z[idx - 1]) == np.sign(z[idx])) & (np.sign(z[idx + 1]) == np.sign(z[idx]))]
    brackets = []
    touches = []
    for i in idx:
        lo_t, hi_t = t[i - 1], t[i + 1]
        for _ in range(6):
            tt = np.linspace(lo_t, hi_t, refine + 1)
            zz = real_line_function(F, tt, scaled=True)
            ch = np.nonzero(np.sign(zz[:-1]) != np.sign(zz[1:]))[0]
            if ch.size:
                brackets.extend((tt[j], tt[j + 1], zz[j]) for j in ch)
                break
            j = int(np.argmin(np.abs(zz)))
            scale = float(np.max(np.abs(zz)))
            if abs(zz[j]) > 1e-3 * scale:
                break  # a genuine non-vanishing local minimum
            lo_t, hi_t = tt[max(j - 1, 0)], tt[min(j + 1, refine)]
            if hi_t - lo_t < BISECT_WIDTH:
                break
        else:
            j = int(np.argmin(np.abs(zz)))
            if abs(zz[j]) <= 1e-6 * float(np.max(np.abs(z[i - 1 : i + 2]))):
                touches.append(float(tt[j]))
    return brackets, touches


def find_zeros(
    F: SelbergData,
    T: float,
    grid_step: float | None = None,
    workers: int | None = None,
    check_count: bool = True,
) -> ZeroList:
    """All zeros ``0 < gamma <= T`` of ``xi_F(1/2 - iz)`` for a self-dual instance."""
    if T > 1e3:
        raise ValueError("heights above 1e3 are outside the supported envelope")
    if F.factors:
        parts = [find_zeros(f, T, grid_step, workers, check_count) for f in F.factors]
        out = parts[0]
        for p in parts[1:]:
            out = out.merge(p)
        return out
    return _find_zeros_cached(F, float(T), float(grid_step or DEFAULT_GRID_STEP), _workers(workers), check_count)


@lru_cache(maxsize=64)
def _find_zeros_cached(F, T, step, workers, check_count):
    _rotation(F)
    central = central_multiplicity(F)
    # keep the grid at <= 1/10 of the local mean spacing
    dens = float(zero_density(F, T))
    step = min(step, 0.1 / max(dens, 1e-3))
    n = int(math.ceil(T / step))
    t = np.linspace(0.0, T, n + 1)
    t[0] = min(step * 1e-3, 1e-6)  # step off the centre, which may itself be a zero
    z = _evaluate(F, t, workers)
    ch = np.nonzero(np.sign(z[:-1]) * np.sign(z[1:]) < 0)[0]
    lo, hi, flo = t[ch], t[ch + 1], z[ch]
    extra, touches = _probe_minima(F, t, z)
    if extra:
        e = np.array(extra)
        lo, hi, flo = np.concatenate([lo, e[:, 0]]), np.concatenate([hi, e[:, 1]]), np.concatenate([flo, e[:, 2]])
    # exact zeros on grid points
    exact = t[1:][z[1:] == 0]
    roots = np.concatenate([_bisect(F, lo, hi, flo), exact])
    mult = np.ones(roots.size, dtype=int)
    if touches:
        roots = np.concatenate([roots, touches])
        mult = np.concatenate([mult, np.full(len(touches), 2)])
        log.warning("%s: even-order touch points recorded with multiplicity 2: %s", F.name, touches)
    keep = (roots > 0) & (roots <= T)
    order = np.argsort(roots[keep])
    zl = ZeroList(roots[keep][order], mult[keep][order], T, True, "computed", tuple(touches))
    if check_count:
        check_zero_count(F, zl, central.m0)
    return zl


def count_mismatch(F: SelbergData, zl: ZeroList, m0: int) -> tuple[float, float]:
    """``(delta at T, mean delta over the top tenth of [0, T])`` of found minus estimated counts."""
    T = zl.height_bound
    ts = np.linspace(0.9 * T, T, 201)
    found = np.array([zl.multiplicities[zl.ordinates <= x].sum() for x in ts])
    delta = found - counting_estimate(F, ts, m0)
    return float(delta[-1]), float(delta.mean())


def check_zero_count(F: SelbergData, zl: ZeroList, m0: int) -> None:
    """Raise :class:`MissedZeroError` when the found count drifts from the estimate by more than 1.

    The endpoint difference absorbs the bounded oscillation of the argument
    of F; if it exceeds 1 the mean over the top tenth of the range decides.
    """
    at_T, mean = count_mismatch(F, zl, m0)
    if abs(at_T) <= 1 or abs(mean) <= 1:
        return
    T = zl.height_bound
    grid = np.linspace(0, T, 401)[1:]
    found = np.array([zl.multiplicities[zl.ordinates <= x].sum() for x in grid])
    delta = found - counting_estimate(F, grid, m0)
    bad = np.nonzero(np.abs(delta - np.round(mean)) < 0.5)[0]
    first = int(bad[0]) if bad.size else len(grid) - 1
    interval = (float(grid[max(first - 1, 0)]) if first else 0.0, float(grid[first]))
    raise MissedZeroError(
        f"{F.name}: found {zl.total} zeros up to {T:g}, estimate "
        f"{float(counting_estimate(F, T, m0)):.2f}; suspect interval {interval}",
        interval,
    )


# ---------------------------------------------------------------------------
# central point
# ---------------------------------------------------------------------------


def ring_taylor(F: SelbergData, radius: float = RING_RADIUS, points: int = RING_POINTS):
    """Taylor coefficients of xi_F at 1/2 by trapezoidal Cauchy integrals on a ring.

    Returns ``(c, ring_max)`` with ``c[j] = xi^(j)(1/2) / j!``.
    """
    theta_ = 2 * math.pi * np.arange(points) / points
    vals = xi_eval(F, 0.5 + radius * np.exp(1j * theta_))
    coeffs = np.fft.fft(vals) / points  # c_j radius^j
    c = coeffs / radius ** np.arange(points)
    return c, float(np.max(np.abs(vals)))


def central_multiplicity(
    F: SelbergData,
    tol: float = CENTRAL_TOL,
    radius: float = RING_RADIUS,
    j_max: int = MAX_CENTRAL_ORDER,
) -> CentralData:
    """Order of vanishing of xi_F at s = 1/2."""
    return _central_cached(F, tol, radius, j_max)


@lru_cache(maxsize=64)
def _central_cached(F, tol, radius, j_max):
    c, ring_max = ring_taylor(F, radius)
    scaled = np.abs(c[: j_max + 1]) * radius ** np.arange(j_max + 1) / ring_max
    for j, v in enumerate(scaled):
        if v > tol:
            return CentralData(j, float(v), c[: j_max + 2].copy(), radius)
    raise IndeterminateMultiplicity(
        f"{F.name}: all scaled derivatives up to order {j_max} are below {tol:g}"
    )


# ---------------------------------------------------------------------------
# tables
# ---------------------------------------------------------------------------


def load_zero_table(path: str | Path, T_declared: float) -> ZeroList:
    """Read ascending positive ordinates, one per line; ``#`` lines and blanks are skipped.

    A ``gamma,multiplicity`` CSV written by :meth:`ZeroList.to_csv` is accepted too.
    """
    ords: list[float] = []
    mults: list[int] = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.lower().startswith("gamma"):
                continue
            fields = [f.strip() for f in line.split(",")]
            try:
                g = float(fields[0])
                m = int(fields[1]) if len(fields) > 1 else 1
            except (ValueError, IndexError):
                raise ZeroTableError(f"not a number: {line!r}", lineno) from None
            if not math.isfinite(g) or g <= 0:
                raise ZeroTableError(f"ordinate must be positive, got {line!r}", lineno)
            if m < 1:
                raise ZeroTableError("multiplicity must be positive", lineno)
            if ords and g <= ords[-1]:
                raise ZeroTableError(f"ordinates not ascending ({g} after {ords[-1]})", lineno)
            if g > T_declared:
                break
            ords.append(g)
            mults.append(m)
    return ZeroList(np.array(ords), np.array(mults, dtype=int), T_declared, True, "loaded")


def instance_zeros(name: str, T: float, zero_table: str | Path | None = None) -> ZeroList:
    """Zeros of a registry instance, optionally from a loaded table."""
    if zero_table is not None:
        return load_zero_table(zero_table, T)
    return find_zeros(get_instance(name), T)
