"""Numerical checks of the analytic identities behind the Levy-Khintchine picture.

Every check returns a :class:`CheckReport`; ``passed`` is true exactly when the
largest residual is within tolerance.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import exp1

from .levy import LevyTriplet, g_values, tail_bound
from .lfunc import SelbergData, xi_log_deriv, zeta_eval
from .zeros import tail_integral

log = logging.getLogger(__name__)

BOUNDARY_MARGIN = 0.1
ENVELOPE_TOL = 1e-12
SELF_TEST_POINTS = (2j, 1 + 2j, 3j)

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1]
_XK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
K_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
G_WEIGHTS = np.zeros(15)
G_WEIGHTS[1:7:2] = _WG[:3]
G_WEIGHTS[7] = _WG[3]
G_WEIGHTS[9:14:2] = _WG[2::-1]


class PreconditionError(ValueError):
    pass


@dataclass
class CheckReport:
    name: str
    points: list
    residuals: list[float]
    tolerance: float
    passed: bool = field(init=False)
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        self.residuals = [float(r) for r in self.residuals]
        self.passed = self.max_residual <= self.tolerance

    @property
    def max_residual(self) -> float:
        return max(self.residuals, default=0.0)

    def to_dict(self) -> dict:
        rows = [{"point": _jsonable(p), "residual": r} for p, r in zip(self.points, self.residuals)]
        return {
            "name": self.name,
            "tolerance": self.tolerance,
            "max_residual": self.max_residual,
            "passed": self.passed,
            "rows": rows,
            "details": _jsonable(self.details),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


# ---------------------------------------------------------------------------
# Quadrature
# ---------------------------------------------------------------------------


def _gk15(f, a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Kronrod estimate and |K15 - G7| error on many panels at once."""
    mid, half = 0.5 * (a + b), 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * NODES
    fx = f(x.ravel()).reshape(x.shape)
    k = half * (fx @ K_WEIGHTS)
    g = half * (fx @ G_WEIGHTS)
    return k, np.abs(k - g)


def dyadic_panels(upper: float, first: float = 1.0) -> np.ndarray:
    """Breakpoints 0, first, 2 first, 4 first, ... capped at ``upper``."""
    edges = [0.0]
    x = first
    while x < upper:
        edges.append(x)
        x *= 2
    edges.append(upper)
    return np.array(edges)


def gauss_kronrod(f, a: float, b: float, abs_tol: float = 1e-13, rel_tol: float = 1e-12,
                  breakpoints=None, max_panels: int = 200_000) -> tuple[complex, float]:
    """Adaptive G7-K15 over ``[a, b]``; ``f`` maps a 1-d array of nodes to values.

    All active panels are refined in one vectorized sweep. A panel is accepted
    once its error is below its share of the global tolerance.
    """
    edges = np.asarray(breakpoints if breakpoints is not None else [a, b], dtype=float)
    lo, hi = edges[:-1], edges[1:]
    total, err_total = 0j, 0.0
    k, e = _gk15(f, lo, hi)
    scale = float(np.sum(np.abs(k)))
    while lo.size:
        tol = max(abs_tol, rel_tol * scale)
        share = tol * (hi - lo) / (b - a)
        ok = (e <= share) | ((hi - lo) < 1e-12 * (b - a))
        total += complex(np.sum(k[ok]))
        err_total += float(np.sum(e[ok]))
        lo, hi = lo[~ok], hi[~ok]
        if not lo.size:
            break
        if lo.size > max_panels:
            raise ArithmeticError("adaptive quadrature exceeded its panel budget")
        m = 0.5 * (lo + hi)
        lo, hi = np.concatenate([lo, m]), np.concatenate([m, hi])
        k, e = _gk15(f, lo, hi)
    return total, err_total


def laplace_integral(f, z: complex, upper: float, **kw) -> complex:
    """``int_0^upper f(t) e^{izt} dt`` on dyadic panels."""
    val, _ = gauss_kronrod(lambda t: f(t) * np.exp(1j * z * t), 0.0, upper,
                           breakpoints=dyadic_panels(upper, 0.5), **kw)
    return val


def kernel_self_test(z_points=SELF_TEST_POINTS, tol: float = 1e-10) -> CheckReport:
    """The two polynomial kernels and one atom kernel against their closed forms."""
    res, pts = [], []
    for z in z_points:
        upper = _cutoff_for(z.imag, 1e-17)
        lin = laplace_integral(lambda t: t, z, upper)
        quad = laplace_integral(lambda t: 0.5 * t * t, z, upper)
        res += [abs(lin + 1 / z**2), abs(quad + 1j / z**3)]
        pts += [(z, "t"), (z, "t^2/2")]
    # one atom at gamma = 1, z = 2i
    z, gam = 2j, 1.0
    atom = laplace_integral(lambda t: (np.exp(-1j * t * gam) - 1) / gam**2, z, _cutoff_for(2, 1e-17))
    res.append(abs(atom - 1j / z**2 * (1 / (z - gam) + 1 / gam)))
    pts.append((z, "atom gamma=1"))
    return CheckReport("kernel-self-test", pts, res, tol)


def _cutoff_for(im_z: float, eps: float) -> float:
    # t e^{-y t} < eps beyond this point, with room for t^2 growth
    return max(8.0, (-math.log(eps) + 3 * math.log(60.0)) / im_z)


# ---------------------------------------------------------------------------
# Integral identity
# ---------------------------------------------------------------------------


def zero_tail_correction(F: SelbergData, triplet: LevyTriplet, z: complex) -> complex:
    """Expected contribution of the zeros above the truncation height.

    Each omitted pair +-gamma adds ``2i / (z (z^2 - gamma^2))``; the sum is
    replaced by an integral against the smooth zero density.
    """
    T = triplet.truncation_height
    if not math.isfinite(T):
        return 0j
    re = tail_integral(F, T, lambda u: (2j / (z * (z * z - u * u))).real)
    im = tail_integral(F, T, lambda u: (2j / (z * (z * z - u * u))).imag)
    return complex(re, im)


def integral_identity_check(F: SelbergData, triplet: LevyTriplet, z_points, t_cutoff: float = 40.0,
                            tol: float = 1e-4, allow_near_boundary: bool = False,
                            tail_correction: bool = True) -> CheckReport:
    """``int_0^t_cutoff g_F(t) e^{izt} dt`` against ``z^-2 (xi'/xi)(1/2 - iz)``.

    The reported residual adds the density estimate of the omitted zeros to the
    quadrature when ``tail_correction`` is set; the uncorrected residuals are
    always kept in ``details['raw_residuals']``.
    """
    z_points = [complex(z) for z in z_points]
    for z in z_points:
        if allow_near_boundary:
            if z.imag <= 0:
                raise PreconditionError(f"Im z must be positive, got {z}")
        elif z.imag <= 0.5 + BOUNDARY_MARGIN:
            raise PreconditionError(f"Im z must exceed {0.5 + BOUNDARY_MARGIN}, got {z}")
        envelope = math.exp(-z.imag * t_cutoff) * abs(complex(g_values(triplet, t_cutoff)))
        if envelope >= ENVELOPE_TOL:
            raise PreconditionError(f"t_cutoff={t_cutoff} leaves envelope {envelope:.2e} at z={z}")
    s_points = np.array([0.5 - 1j * z for z in z_points])
    rhs = xi_log_deriv(F, s_points) / np.array(z_points) ** 2
    raw, corrected, lhs_vals, tails = [], [], [], []
    for z, r in zip(z_points, rhs):
        lhs = laplace_integral(lambda t: g_values(triplet, t), z, t_cutoff)
        tail = zero_tail_correction(F, triplet, z) if tail_correction else 0j
        raw.append(abs(lhs - r))
        corrected.append(abs(lhs + tail - r))
        lhs_vals.append(lhs)
        tails.append(tail)
    details = {
        "instance": F.name,
        "T": triplet.truncation_height,
        "t_cutoff": t_cutoff,
        "tail_correction": tail_correction,
        "raw_residuals": raw,
        "lhs": lhs_vals,
        "rhs": list(rhs),
        "tail_estimate": tails,
    }
    return CheckReport("integral-identity", z_points, corrected, tol, details)


# ---------------------------------------------------------------------------
# Euler product as a compound Poisson exponent
# ---------------------------------------------------------------------------


def primes_up_to(n: int) -> np.ndarray:
    """Sieve of Eratosthenes."""
    if n < 2:
        return np.empty(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(n) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


def prime_tail_exponent(sigma: float, t: float, prime_bound: int) -> complex:
    """``sum_{p > P} p^-sigma (p^-it - 1)`` from the prime density ``1/log x``.

    The substitution ``x = e^u`` turns the integral into exponential integrals.
    """
    if t == 0:
        return 0j
    L = math.log(prime_bound)
    return complex(exp1((sigma - 1 + 1j * t) * L) - exp1((sigma - 1) * L))


def gk68_check(sigma: float, t_points, prime_bound: int = 100_000, power_bound: int = 30,
               tol: float = 1e-8, tail_correction: bool = True) -> CheckReport:
    """``zeta(sigma+it)/zeta(sigma)`` against the truncated Euler-product exponent."""
    if not sigma > 1:
        raise PreconditionError("sigma must exceed 1 for absolute convergence")
    t = np.asarray(t_points, dtype=float)
    p = primes_up_to(prime_bound).astype(float)
    logp = np.log(p)
    r = np.arange(1, power_bound + 1, dtype=float)
    # weights p^{-r sigma} / r and frequencies r log p, smallest terms first
    w = (np.exp(-sigma * np.outer(r, logp)) / r[:, None]).ravel()
    freq = np.outer(r, logp).ravel()
    order = np.argsort(w)
    w, freq = w[order], freq[order]
    zeta_sigma = zeta_eval(sigma).real
    direct = zeta_eval(sigma + 1j * t) / zeta_sigma
    raw, corrected, tails = [], [], []
    for tt, lhs in zip(t, direct):
        ph = tt * freq
        expo = complex(np.sum(w * (np.cos(ph) - 1)), -np.sum(w * np.sin(ph)))
        tail = prime_tail_exponent(sigma, tt, prime_bound) if tail_correction else 0j
        raw.append(abs(lhs - np.exp(expo)))
        corrected.append(abs(lhs - np.exp(expo + tail)))
        tails.append(tail)
    # |sum_{p>P} p^-sigma (e^{-it log p} - 1)| <= 2 sum_{p>P} p^-sigma
    bound = 2 * float(exp1((sigma - 1) * math.log(prime_bound)))
    details = {
        "sigma": sigma,
        "prime_bound": prime_bound,
        "power_bound": power_bound,
        "tail_correction": tail_correction,
        "raw_residuals": raw,
        "tail_estimate": tails,
        "tail_bound": bound,
        "modulus": [float(abs(v)) for v in direct],
    }
    return CheckReport("gk68", t.tolist(), corrected, tol, details)


# ---------------------------------------------------------------------------
# Real zeros and nonpositivity
# ---------------------------------------------------------------------------


def real_zero_scan(F: SelbergData, a: float, b: float, step: float = 1e-3,
                   min_step: float = 1e-4, warn_level: float = 1e-10) -> CheckReport:
    """Sign changes of ``(s-1)^m F(s)`` on a grid over ``[a, b]``.

    The factor ``(s-1)^m`` removes the pole without moving any zero inside
    ``(1/2, 1]``. Local minima of ``|F|`` are rescanned ten times finer down to
    ``min_step``; a tiny minimum without a sign change is only logged.
    """
    if not 0.5 < a < b:
        raise PreconditionError("need 1/2 < a < b")
    if F.self_dual_sign is None:
        raise PreconditionError(f"{F.name} is not real on the real axis")
    n = max(2, math.ceil((b - a) / step) + 1)
    s = np.linspace(a, b, n)
    v = F.kernel(s.astype(complex), 1e-14).real
    fine_h = (b - a) / (n - 1) / 10
    if fine_h >= 0.99 * min_step:
        extra_s, extra_v = [s], [v]
        for i in _local_minima(np.abs(v)):
            ss = np.linspace(s[max(i - 1, 0)], s[min(i + 1, s.size - 1)], 21)
            extra_s.append(ss)
            extra_v.append(F.kernel(ss.astype(complex), 1e-14).real)
        s, idx = np.unique(np.concatenate(extra_s), return_index=True)
        v = np.concatenate(extra_v)[idx]
    intervals, touches = _sign_changes(s, v)
    min_abs = float(np.min(np.abs(v)))
    where = float(s[np.argmin(np.abs(v))])
    if not intervals and (min_abs < warn_level or touches):
        log.warning("%s: |F| reaches %.3g at s=%.6f without a sign change", F.name, min_abs, where)
    for lo, hi in intervals:
        log.error("%s: sign change of F in [%.9f, %.9f]", F.name, lo, hi)
    details = {
        "instance": F.name,
        "interval": [a, b],
        "step": step,
        "min_abs": min_abs,
        "argmin": where,
        "sign_changes": intervals,
        "touches": touches,
        "evaluations": int(s.size),
    }
    # residual is the number of sign changes; tolerance zero
    return CheckReport("real-zero-scan", [a, b], [float(len(intervals))], 0.0, details)


def _sign_changes(s: np.ndarray, v: np.ndarray) -> tuple[list[tuple[float, float]], list[float]]:
    """Brackets of sign changes between nonzero samples, and exact zeros that do not change sign."""
    nz = np.flatnonzero(v != 0)
    sg = np.sign(v[nz])
    flips = np.flatnonzero(sg[:-1] != sg[1:])
    intervals = [(float(s[nz[i]]), float(s[nz[i + 1]])) for i in flips]
    exact = np.flatnonzero(v == 0)
    inside = set()
    for lo, hi in intervals:
        inside.update(np.flatnonzero((s > lo) & (s < hi)).tolist())
    touches = [float(s[i]) for i in exact if i not in inside]
    return intervals, touches


def _local_minima(x: np.ndarray) -> np.ndarray:
    if x.size < 3:
        return np.array([], dtype=int)
    inner = np.flatnonzero((x[1:-1] <= x[:-2]) & (x[1:-1] <= x[2:])) + 1
    ends = [i for i, ok in ((0, x[0] < x[1]), (x.size - 1, x[-1] < x[-2])) if ok]
    return np.union1d(inner, ends).astype(int)


def nonpositivity_check(triplet: LevyTriplet, t_max: float = 100.0, n_points: int = 10_000,
                        slack: float = 1e-12) -> CheckReport:
    """``Re g_F(t) <= tail_bound(t)`` on a symmetric grid; residual counts violations."""
    t = np.linspace(-t_max, t_max, n_points)
    re = g_values(triplet, t).real
    excess = re - tail_bound(triplet, t)
    bad = excess > slack
    details = {
        "instance": triplet.name,
        "T": triplet.truncation_height,
        "max_re_g": float(re.max()),
        "max_excess": float(excess.max()),
        "violations": t[bad].tolist()[:50],
    }
    return CheckReport("lk-nonpositivity", [-t_max, t_max], [float(bad.sum())], 0.0, details)
