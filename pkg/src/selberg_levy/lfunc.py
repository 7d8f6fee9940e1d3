"""Selberg-class instances and their completed functions.

Shipped instances: ``zeta``, ``zeta2`` (zeta squared, kept as a structural
product), and ``cusp12/18/22/26``, the L-functions of the normalized level-one
eigenforms shifted to the unitary normalization ``F(s) = L(s + (k-1)/2, f)``.

All evaluators are vectorized over complex ``s`` and work in double precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache, reduce
from typing import Callable

import numpy as np
from scipy.special import bernoulli, digamma, loggamma

from . import qexp
from ._incgamma import upper_tail

MAX_HEIGHT = 1.0e3
DEFAULT_TOL = 1e-12
DERIV_STEP = 1e-3  # central-difference step for F'(s) on AFE instances

LOG_2PI = math.log(2 * math.pi)


class PoleError(ValueError):
    """Evaluation requested at a pole of F."""


class AccuracyError(ArithmeticError):
    """The requested accuracy cannot be met at this height."""


class InsufficientCoefficients(AccuracyError):
    def __init__(self, needed: int, available: int):
        super().__init__(
            f"approximate functional equation needs {needed} coefficients, "
            f"only {available} allowed"
        )
        self.needed = needed


class ZeroOfXiError(ZeroDivisionError):
    """Logarithmic derivative requested at a zero of the completed function."""


Kernel = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True, eq=False)
class SelbergData:
    """Functional-equation data of one instance plus its evaluator.

    ``kernel(s, tol)`` returns ``(s - 1)**m_F * F(s)`` so that nothing is
    singular at ``s = 1``. ``dkernel`` is the matching derivative, or None to
    fall back on central differences.
    """

    name: str
    m_F: int
    Q: float
    gamma_factors: tuple[tuple[float, complex], ...]
    omega: complex
    kernel: Kernel = field(repr=False)
    dkernel: Kernel | None = field(default=None, repr=False)
    coeff_source: Callable[[int], np.ndarray] | None = field(default=None, repr=False)
    factors: tuple["SelbergData", ...] = field(default=(), repr=False)

    def __post_init__(self):
        if abs(abs(self.omega) - 1.0) > 1e-12:
            raise ValueError(f"|omega| must be 1, got {abs(self.omega)}")
        if self.Q <= 0:
            raise ValueError("Q must be positive")
        for lam, mu in self.gamma_factors:
            if lam <= 0 or complex(mu).real < 0:
                raise ValueError(f"invalid gamma factor ({lam}, {mu})")

    @property
    def degree(self) -> float:
        return 2.0 * sum(lam for lam, _ in self.gamma_factors)

    @property
    def self_dual_sign(self) -> int | None:
        """+1 or -1 when omega is real, else None."""
        if abs(self.omega - 1) < 1e-12:
            return 1
        if abs(self.omega + 1) < 1e-12:
            return -1
        return None

    @property
    def components(self) -> tuple["SelbergData", ...]:
        return self.factors or (self,)

    def __call__(self, s, tol: float = DEFAULT_TOL):
        """F(s)."""
        s = np.asarray(s, dtype=complex)
        if self.m_F and np.any(s == 1):
            raise PoleError(f"{self.name} has a pole at s = 1")
        val = self.kernel(s, tol)
        if self.m_F:
            val = val / (s - 1) ** self.m_F
        return val

    def coefficients(self, n: int) -> np.ndarray:
        """a_F(1..n) as floats."""
        if self.coeff_source is None:
            raise NotImplementedError(f"{self.name} has no coefficient source")
        return self.coeff_source(n)

    def __mul__(self, other: "SelbergData") -> "SelbergData":
        return product(self, other)


def product(*factors: SelbergData) -> SelbergData:
    """The product instance ``F1 * F2 * ...``; data combine per the completed-function definition."""
    flat = tuple(c for f in factors for c in f.components)
    kernels = [f.kernel for f in flat]

    def kernel(s, tol):
        return reduce(lambda acc, k: acc * k(s, tol / len(kernels)), kernels, 1.0)

    dkernel = None
    if all(f.dkernel is not None for f in flat):

        def dkernel(s, tol):
            vals = [f.kernel(s, tol) for f in flat]
            ders = [f.dkernel(s, tol) for f in flat]
            total = 0.0
            for i in range(len(flat)):
                term = ders[i]
                for j in range(len(flat)):
                    if j != i:
                        term = term * vals[j]
                total = total + term
            return total

    def coeff_source(n):
        out = np.zeros(n)
        out[0] = 1.0
        for f in flat:
            out = _dirichlet_convolve(out, f.coefficients(n))
        return out

    sources_ok = all(f.coeff_source is not None for f in flat)
    return SelbergData(
        name="*".join(f.name for f in flat),
        m_F=sum(f.m_F for f in flat),
        Q=math.prod(f.Q for f in flat),
        gamma_factors=tuple(g for f in flat for g in f.gamma_factors),
        omega=complex(np.prod([f.omega for f in flat])),
        kernel=kernel,
        dkernel=dkernel,
        coeff_source=coeff_source if sources_ok else None,
        factors=flat,
    )


def _dirichlet_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = len(a)
    out = np.zeros(n)
    for d in range(1, n + 1):
        if a[d - 1]:
            out[d - 1 :: d] += a[d - 1] * b[: n // d]
    return out


# ---------------------------------------------------------------------------
# Riemann zeta by Euler-Maclaurin
# ---------------------------------------------------------------------------

_EM_TERMS = 26
_B2K = bernoulli(2 * _EM_TERMS)[2::2]
_B2K_OVER_FACT = np.array([_B2K[k - 1] / math.factorial(2 * k) for k in range(1, _EM_TERMS + 1)])


def _em_cutoff(s: np.ndarray) -> int:
    # 2*pi*N >= 2(|s| + 2K) keeps successive correction terms shrinking by 4x
    smax = float(np.max(np.abs(s))) if s.size else 0.0
    return max(12, int(math.ceil((smax + 2 * _EM_TERMS) / math.pi)) + 1)


def _zeta_em(s: np.ndarray, tol: float, derivative: bool = False):
    """Return ``(s-1)*zeta(s)`` and, if asked, its derivative."""
    s = np.asarray(s, dtype=complex)
    if s.size and float(np.max(np.abs(s.imag))) > MAX_HEIGHT:
        raise AccuracyError(f"|Im s| > {MAX_HEIGHT:g} is outside the supported envelope")
    flat = s.ravel()
    out = np.empty_like(flat)
    dout = np.empty_like(flat) if derivative else None
    left = flat.real < -0.5
    if left.any():
        # the partial sums cancel badly for Re s < 0; reflect, keeping 1 - s away from the pole
        v, dv = _zeta_reflected(flat[left], tol, derivative)
        out[left] = v
        if derivative:
            dout[left] = dv
    right = np.flatnonzero(~left)
    # chunk so the cutoff tracks the local height
    order = right[np.argsort(np.abs(flat[right]))]
    for idx in np.array_split(order, max(1, len(order) // 256)):
        if idx.size == 0:
            continue
        v, dv = _zeta_em_block(flat[idx], tol, derivative)
        out[idx] = v
        if derivative:
            dout[idx] = dv
    if derivative:
        return out.reshape(s.shape), dout.reshape(s.shape)
    return out.reshape(s.shape)


def _zeta_reflected(s: np.ndarray, tol: float, derivative: bool):
    """``(s-1) zeta(s)`` for Re s < -1/2 from ``zeta(s) = chi(s) zeta(1-s)``.

    ``chi(s) = 2^s pi^(s-1) sin(pi s/2) Gamma(1-s)``. The exponentially large
    part of sin and cos is pulled out as ``P`` and combined with Gamma in log
    form, so nothing overflows for |Im s| up to the height envelope.
    """
    z = 0.5 * math.pi * s
    up = z.imag >= 0
    q = np.exp(np.where(up, 2j * z, -2j * z))  # |q| <= 1
    log_p = np.where(up, -1j * z, 1j * z)
    sin_r = np.where(up, (q - 1) / 2j, (1 - q) / 2j)  # sin z / P
    cos_r = (1 + q) / 2  # cos z / P
    log_base = s * math.log(2) + (s - 1) * math.log(math.pi) + loggamma(1 - s) + log_p
    base = np.exp(log_base)
    chi = base * sin_r
    w = 1 - s
    kw, dkw = _zeta_em(w, tol, derivative=True)
    zeta_w = kw / (w - 1)
    value = (s - 1) * chi * zeta_w
    if not derivative:
        return value, None
    dchi = base * ((math.log(2 * math.pi) - digamma(1 - s)) * sin_r + 0.5 * math.pi * cos_r)
    dzeta_w = dkw / (w - 1) - kw / (w - 1) ** 2
    # d/ds zeta(1-s) = -zeta'(1-s)
    dvalue = chi * zeta_w + (s - 1) * (dchi * zeta_w - chi * dzeta_w)
    return value, dvalue


def _zeta_em_block(s: np.ndarray, tol: float, derivative: bool):
    N = _em_cutoff(s)
    n = np.arange(1, N, dtype=float)
    logn = np.log(n)
    powers = np.exp(-np.outer(s, logn))  # n^-s
    head = powers.sum(axis=1)
    logN = math.log(N)
    NmS = np.exp(-s * logN)  # N^-s
    sm1 = s - 1.0
    # (s-1) zeta(s) = (s-1)[sum + N^-s/2 + corrections] + N^(1-s)
    body = head + 0.5 * NmS
    P = np.ones_like(s)  # rising product s(s+1)...(s+2k-2), built two factors at a time
    dP = np.zeros_like(s)
    corr = np.zeros_like(s)
    dcorr = np.zeros_like(s)
    NmS1 = NmS * N  # N^(1-s)
    for k in range(1, _EM_TERMS + 1):
        if k == 1:
            P, dP = s.copy(), np.ones_like(s)
        else:
            a = s + (2 * k - 3)
            b = s + (2 * k - 2)
            dP = dP * a * b + P * (a + b)
            P = P * a * b
        scale = _B2K_OVER_FACT[k - 1] * NmS1 * float(N) ** (-2 * k)
        term = scale * P
        corr += term
        size = np.abs(term)
        if derivative:
            dterm = scale * (dP - logN * P)
            dcorr += dterm
            # P vanishes identically at s = 0 while dP does not
            size = np.maximum(size, np.abs(dterm))
        if np.all(size <= 0.1 * tol * np.maximum(1.0, np.abs(body))):
            break
    else:
        if np.any(size > tol):
            raise AccuracyError("Euler-Maclaurin tail did not reach the requested accuracy")
    total = body + corr
    value = sm1 * total + NmS1
    if not derivative:
        return value, None
    dhead = -(powers * logn).sum(axis=1)
    dbody = dhead - 0.5 * logN * NmS
    dvalue = total + sm1 * (dbody + dcorr) - logN * NmS1
    return value, dvalue


def zeta_eval(s, target_abs_err: float = DEFAULT_TOL):
    """Riemann zeta at complex ``s`` (vectorized)."""
    s = np.asarray(s, dtype=complex)
    if np.any(s == 1):
        raise PoleError("zeta has a pole at s = 1")
    return _zeta_em(s, target_abs_err) / (s - 1)


def zeta_deriv(s, target_abs_err: float = DEFAULT_TOL):
    """zeta'(s) from the termwise-differentiated Euler-Maclaurin formula."""
    s = np.asarray(s, dtype=complex)
    if np.any(s == 1):
        raise PoleError("zeta has a pole at s = 1")
    v, dv = _zeta_em(s, target_abs_err, derivative=True)
    return dv / (s - 1) - v / (s - 1) ** 2


# ---------------------------------------------------------------------------
# Cusp-form L-functions by a rotated approximate functional equation
# ---------------------------------------------------------------------------

AFE_LOSS = 4.0  # allowed growth exp(AFE_LOSS) of individual terms over the result
MAX_COEFFS = 1 << 15


@lru_cache(maxsize=None)
def _cusp_coeffs(weight: int, order: int) -> np.ndarray:
    a = np.array([float(x) for x in qexp.cusp_form(weight, order).a])
    a.setflags(write=False)
    return a


def _coeff_order(needed: int) -> int:
    return max(1024, 1 << int(math.ceil(math.log2(max(needed, 1)))))


def _afe_rotation(t: np.ndarray) -> np.ndarray:
    # rotate the Mellin contour to balance exp(-alpha t) against the decay of Lambda
    at = np.abs(t)
    alpha = np.where(at > AFE_LOSS / (math.pi / 2), math.pi / 2 - AFE_LOSS / np.maximum(at, 1e-300), 0.0)
    return alpha


def _afe_terms_needed(weight: int, w: np.ndarray, alpha: np.ndarray, tol: float) -> np.ndarray:
    """Number of coefficients after which the AFE tail is below ``tol`` (relative to |F| ~ 1).

    Past the stationary region ``E(w, c) ~ e^{-c} / (c - w)``; the coefficient
    growth is bounded by Deligne's ``d(n) n^((k-1)/2) <= 2 sqrt(n) n^((k-1)/2)``.
    """
    t = np.abs(w.imag)
    log_mult = -alpha * t + w.real * LOG_2PI - loggamma(w).real
    cos_a = np.cos(alpha)
    half = (weight - 1) / 2.0
    # search n on a geometric grid up to a generous cap, then take the last offender
    n = np.unique(np.round(np.geomspace(1, 1 << 16, 400)))
    logn = np.log(n)
    c_abs = 2 * math.pi * n
    logterm = (
        math.log(2.0)
        + (half + 0.5) * logn[None, :]
        - c_abs[None, :] * cos_a[:, None]
        - np.log(np.maximum(np.abs(c_abs[None, :] - t[:, None]), 1.0))
        + log_mult[:, None]
    )
    big = logterm > math.log(tol) - 4.0
    last = np.where(big.any(axis=1), big.shape[1] - 1 - np.argmax(big[:, ::-1], axis=1), 0)
    nxt = np.minimum(last + 1, len(n) - 1)
    return np.where(big.any(axis=1), n[nxt].astype(int) + 1, 1).astype(int)


def cuspform_eval(weight: int, s, target_abs_err: float = DEFAULT_TOL, max_coeffs: int = MAX_COEFFS):
    """F_f(s) = L(s + (k-1)/2, f) everywhere in the plane.

    Uses the level-one identity obtained by splitting the Mellin integral of
    f(iy) at y = 1 along a ray rotated by ``alpha``:

        Lambda(w) = sum a_n [ e^{i alpha w} E(w, 2 pi n e^{i alpha})
                              + i^k e^{i alpha (w - k)} E(k - w, 2 pi n e^{-i alpha}) ]

    with ``Lambda(w) = (2 pi)^-w Gamma(w) L(w, f)`` and ``E`` the incomplete
    gamma tail of :mod:`._incgamma`.
    """
    if weight not in qexp.SUPPORTED_WEIGHTS:
        raise ValueError(f"unsupported weight {weight}; supported: {list(qexp.SUPPORTED_WEIGHTS)}")
    s = np.asarray(s, dtype=complex)
    if s.size and float(np.max(np.abs(s.imag))) > MAX_HEIGHT:
        raise AccuracyError(f"|Im s| > {MAX_HEIGHT:g} is outside the supported envelope")
    flat = s.ravel()
    # real coefficients: F(conj s) = conj F(s)
    flip = flat.imag < 0
    z = np.where(flip, flat.conjugate(), flat)
    w = z + (weight - 1) / 2.0
    alpha = _afe_rotation(w.imag)
    need = _afe_terms_needed(weight, w, alpha, target_abs_err)
    if need.size and need.max() > max_coeffs:
        raise InsufficientCoefficients(int(need.max()), max_coeffs)
    out = np.empty(z.shape, dtype=complex)
    order = np.argsort(need)
    for idx in np.array_split(order, max(1, len(order) // 64)):
        if idx.size == 0:
            continue
        nmax = int(need[idx].max())
        a = _cusp_coeffs(weight, _coeff_order(nmax))[:nmax]
        out[idx] = _afe_block(weight, w[idx], alpha[idx], a)
    out = np.where(flip, out.conjugate(), out)
    return out.reshape(s.shape)


def _afe_block(weight: int, w: np.ndarray, alpha: np.ndarray, a: np.ndarray) -> np.ndarray:
    n = np.arange(1, len(a) + 1, dtype=float)
    rot = np.exp(1j * alpha)[:, None]
    c = 2 * math.pi * n[None, :] * rot
    E1 = upper_tail(w[:, None], c)
    E2 = upper_tail(weight - w[:, None], np.conj(c))
    sign = 1j**weight
    inv_gamma = w * LOG_2PI - loggamma(w)  # log of 1/((2 pi)^-w Gamma(w))
    m1 = np.exp(1j * alpha * w + inv_gamma)
    m2 = sign * np.exp(1j * alpha * (w - weight) + inv_gamma)
    return m1 * (E1 @ a) + m2 * (E2 @ a)


# ---------------------------------------------------------------------------
# Completed functions
# ---------------------------------------------------------------------------


def _absorbed_factors(F: SelbergData) -> list[bool]:
    # s * Gamma(lam s) = Gamma(lam s + 1) / lam removes the s^m / Gamma pole pairing at s = 0
    budget = F.m_F
    flags = []
    for _lam, mu in F.gamma_factors:
        take = budget > 0 and complex(mu) == 0
        flags.append(take)
        budget -= take
    return flags


def log_prefactor(F: SelbergData, s) -> np.ndarray:
    """Log of ``s^m (s-1)^m Q^s prod Gamma(lam s + mu)`` with (s-1)^m moved onto F.

    Returned branch is the sum of principal logs; only exp() of it is used.
    """
    s = np.asarray(s, dtype=complex)
    flags = _absorbed_factors(F)
    m_s = F.m_F - sum(flags)
    val = s * math.log(F.Q) + 0j
    if m_s:
        val = val + m_s * np.log(s)
    for (lam, mu), absorbed in zip(F.gamma_factors, flags):
        if absorbed:
            val = val + loggamma(lam * s + 1.0) - math.log(lam)
        else:
            val = val + loggamma(lam * s + mu)
    return val


def xi_eval(F: SelbergData, s, tol: float = DEFAULT_TOL):
    """Completed function ``xi_F(s) = s^m (s-1)^m Q^s prod Gamma(lam_j s + mu_j) F(s)``."""
    s = np.asarray(s, dtype=complex)
    lp = log_prefactor(F, s)
    if np.any(lp.real > 700):
        raise OverflowError("gamma factor overflows; use log_xi for large |s|")
    return np.exp(lp) * F.kernel(s, tol)


def log_xi(F: SelbergData, s, tol: float = DEFAULT_TOL):
    """``log xi_F(s)`` (principal logs; phase defined mod 2 pi) for heights where xi underflows."""
    s = np.asarray(s, dtype=complex)
    return log_prefactor(F, s) + np.log(F.kernel(s, tol))


def _kernel_derivative(F: SelbergData, s: np.ndarray, tol: float) -> np.ndarray:
    if F.dkernel is not None:
        return F.dkernel(s, tol)
    h = DERIV_STEP
    # five-point central difference along the real direction (F is analytic)
    k = F.kernel
    return (-k(s + 2 * h, tol) + 8 * k(s + h, tol) - 8 * k(s - h, tol) + k(s - 2 * h, tol)) / (12 * h)


def xi_log_deriv(F: SelbergData, s, tol: float = DEFAULT_TOL):
    """``xi_F'(s) / xi_F(s)``."""
    s = np.asarray(s, dtype=complex)
    kern = F.kernel(s, tol)
    if np.any(kern == 0):
        raise ZeroOfXiError(f"xi_{F.name} vanishes at the requested point")
    flags = _absorbed_factors(F)
    m_s = F.m_F - sum(flags)
    val = math.log(F.Q) + 0j * s
    if m_s:
        val = val + m_s / s
    for (lam, mu), absorbed in zip(F.gamma_factors, flags):
        val = val + lam * digamma(lam * s + (1.0 if absorbed else mu))
    return val + _kernel_derivative(F, s, tol) / kern


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------


def _zeta_kernel(s, tol):
    return _zeta_em(np.asarray(s, dtype=complex), tol)


def _zeta_dkernel(s, tol):
    return _zeta_em(np.asarray(s, dtype=complex), tol, derivative=True)[1]


def make_zeta() -> SelbergData:
    return SelbergData(
        name="zeta",
        m_F=1,
        Q=math.pi**-0.5,
        gamma_factors=((0.5, 0j),),
        omega=1 + 0j,
        kernel=_zeta_kernel,
        dkernel=_zeta_dkernel,
        coeff_source=lambda n: np.ones(n),
    )


def make_cusp(weight: int) -> SelbergData:
    if weight not in qexp.SUPPORTED_WEIGHTS:
        raise ValueError(f"unsupported weight {weight}; supported: {list(qexp.SUPPORTED_WEIGHTS)}")

    def kernel(s, tol):
        return cuspform_eval(weight, s, tol)

    def coeff_source(n):
        return np.array(qexp.cusp_form(weight, _coeff_order(n)).normalized[:n])

    return SelbergData(
        name=f"cusp{weight}",
        m_F=0,
        Q=1.0 / (2 * math.pi),
        gamma_factors=((1.0, complex((weight - 1) / 2.0)),),
        omega=complex(1j**weight),
        kernel=kernel,
        coeff_source=coeff_source,
    )


INSTANCE_NAMES = ("zeta", "zeta2", "cusp12", "cusp18", "cusp22", "cusp26")


@lru_cache(maxsize=None)
def get_instance(name: str) -> SelbergData:
    """Resolve a registry name; ``a*b`` builds the product of registered instances."""
    name = name.strip()
    if "*" in name:
        return product(*(get_instance(part) for part in name.split("*")))
    if name == "zeta":
        return make_zeta()
    if name == "zeta2":
        z = get_instance("zeta")
        p = product(z, z)
        return replace(p, name="zeta2")
    if name.startswith("cusp") and name[4:].isdigit() and int(name[4:]) in qexp.SUPPORTED_WEIGHTS:
        return make_cusp(int(name[4:]))
    raise KeyError(f"unknown instance {name!r}; known: {', '.join(INSTANCE_NAMES)}")


def direct_sum(F: SelbergData, s, n_terms: int) -> np.ndarray:
    """Partial Dirichlet sum ``sum_{n <= n_terms} a_F(n) n^-s`` (absolute-convergence region only)."""
    s = np.asarray(s, dtype=complex)
    a = F.coefficients(n_terms)
    n = np.arange(1, n_terms + 1, dtype=float)
    return np.exp(-np.multiply.outer(s, np.log(n))) @ a
