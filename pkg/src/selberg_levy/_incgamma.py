"""Upper incomplete-gamma tails for complex order and complex argument.

The quantity computed everywhere is

    E(w, c) = integral_1^inf exp(-c r) r**(w - 1) dr = c**(-w) Gamma(w, c),

valid for Re c > 0. Writing it without the ``c**w`` factor keeps rotated
arguments on the principal branch and avoids a needless overflow path.
"""

from __future__ import annotations

import numpy as np
from scipy.special import loggamma

_TINY = 1e-300
_EPS = 1e-16


def upper_tail(w, c, max_iter: int = 4000) -> np.ndarray:
    """Vectorized ``E(w, c)``; ``w`` and ``c`` broadcast together.

    Uses the power series for the lower part when ``|c| <= |w|`` and the
    Legendre continued fraction (modified Lentz) otherwise.
    """
    w, c = np.broadcast_arrays(np.asarray(w, dtype=complex), np.asarray(c, dtype=complex))
    out = np.empty(w.shape, dtype=complex)
    use_series = np.abs(c) <= np.abs(w)
    if np.any(use_series):
        out[use_series] = _series(w[use_series], c[use_series], max_iter)
    if np.any(~use_series):
        out[~use_series] = _contfrac(w[~use_series], c[~use_series], max_iter)
    return out


def _series(w: np.ndarray, c: np.ndarray, max_iter: int) -> np.ndarray:
    # E = c^-w Gamma(w) - e^-c sum_m c^m / (w)_{m+1}
    total = (1.0 / w).ravel()
    idx = np.arange(w.size)
    wa, ca, term, acc = w.ravel(), c.ravel(), total.copy(), total.copy()
    cabs = np.abs(ca)
    for m in range(1, max_iter):
        term = term * ca / (wa + m)
        acc = acc + term
        done = (np.abs(term) <= _EPS * np.abs(acc)) & (m > cabs)
        if done.any():
            total[idx[done]] = acc[done]
            keep = ~done
            idx, wa, ca, term, acc, cabs = idx[keep], wa[keep], ca[keep], term[keep], acc[keep], cabs[keep]
            if idx.size == 0:
                break
    else:
        raise ArithmeticError("incomplete gamma series did not converge")
    total = total.reshape(w.shape)
    head = np.exp(loggamma(w) - w * np.log(c))
    return head - np.exp(-c) * total


def _contfrac(w: np.ndarray, c: np.ndarray, max_iter: int) -> np.ndarray:
    # Gamma(a, z) z^-a e^z = 1/(z+1-a- 1(1-a)/(z+3-a- 2(2-a)/(z+5-a- ...)))
    b = c + 1.0 - w
    f = 1.0 / np.where(np.abs(b) < _TINY, _TINY, b)
    C = np.full(w.shape, 1.0 / _TINY, dtype=complex)
    D = f.copy()
    result = f.copy()
    idx = np.arange(w.size)
    wa, ba, fa, Ca, Da = w.ravel(), b.ravel(), f.ravel(), C.ravel(), D.ravel()
    out = result.ravel()
    for i in range(1, max_iter):
        an = -i * (i - wa)
        ba = ba + 2.0
        Da = ba + an * Da
        Da = np.where(np.abs(Da) < _TINY, _TINY, Da)
        Ca = ba + an / Ca
        Ca = np.where(np.abs(Ca) < _TINY, _TINY, Ca)
        Da = 1.0 / Da
        delta = Ca * Da
        fa = fa * delta
        done = np.abs(delta - 1.0) <= _EPS
        if done.any():
            out[idx[done]] = fa[done]
            keep = ~done
            idx, wa, ba, fa, Ca, Da = idx[keep], wa[keep], ba[keep], fa[keep], Ca[keep], Da[keep]
            if idx.size == 0:
                break
    else:
        raise ArithmeticError("incomplete gamma continued fraction did not converge")
    return np.exp(-c) * out.reshape(w.shape)
