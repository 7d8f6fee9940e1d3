"""Exact integer q-expansions of level-one Eisenstein series and cusp forms.

Everything here works with Python integers, so coefficients never overflow
or round. Floats appear only in :attr:`CuspFormCoeffs.normalized`.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

SUPPORTED_WEIGHTS = (12, 18, 22, 26)

# weight -> (power of E4, power of E6) multiplying the discriminant
_GENERATORS = {12: (0, 0), 18: (0, 1), 22: (1, 1), 26: (2, 1)}


@dataclass(frozen=True)
class PowerSeries:
    """Truncated power series ``sum coeffs[n] q**n`` for ``n = 0..order``."""

    coeffs: tuple[int, ...]

    def __post_init__(self):
        if not self.coeffs:
            raise ValueError("a power series needs at least the constant term")
        object.__setattr__(self, "coeffs", tuple(int(c) for c in self.coeffs))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, n: int) -> int:
        return self.coeffs[n]

    def __len__(self) -> int:
        return len(self.coeffs)

    def _check(self, other: "PowerSeries") -> None:
        if other.order != self.order:
            raise ValueError(f"order mismatch: {self.order} vs {other.order}")

    def __add__(self, other: "PowerSeries") -> "PowerSeries":
        self._check(other)
        return PowerSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "PowerSeries") -> "PowerSeries":
        self._check(other)
        return PowerSeries(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def __mul__(self, other: "PowerSeries") -> "PowerSeries":
        self._check(other)
        return PowerSeries(_mul_trunc(self.coeffs, other.coeffs, self.order))

    def __pow__(self, k: int) -> "PowerSeries":
        if k < 0:
            raise ValueError("negative powers are not supported")
        result = PowerSeries((1,) + (0,) * self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def truncate(self, order: int) -> "PowerSeries":
        if order > self.order:
            raise ValueError("cannot extend a truncated series")
        return PowerSeries(self.coeffs[: order + 1])

    def to_csv(self, path: str | Path) -> None:
        write_coefficients_csv(path, self.coeffs)


def _mul_trunc(a: tuple[int, ...], b: tuple[int, ...], order: int) -> tuple[int, ...]:
    """Exact truncated product by Kronecker substitution.

    Each operand is split into its positive and negative parts so that every
    packed slot is nonnegative; slots are byte aligned and wide enough that no
    carry crosses into the next coefficient.
    """
    n = order + 1
    bound = max(map(abs, a)) * max(map(abs, b)) * n
    if bound == 0:
        return (0,) * n
    width = (bound.bit_length() + 8) // 8 + 1
    ap, am = _split(a)
    bp, bm = _split(b)
    pos = _pack(ap, width) * _pack(bp, width) + _pack(am, width) * _pack(bm, width)
    neg = _pack(ap, width) * _pack(bm, width) + _pack(am, width) * _pack(bp, width)
    return tuple(x - y for x, y in zip(_unpack(pos, width, n), _unpack(neg, width, n)))


def _split(c: tuple[int, ...]) -> tuple[list[int], list[int]]:
    return [x if x > 0 else 0 for x in c], [-x if x < 0 else 0 for x in c]


def _pack(c: list[int], width: int) -> int:
    return int.from_bytes(b"".join(x.to_bytes(width, "little") for x in c), "little")


def _unpack(value: int, width: int, n: int) -> list[int]:
    raw = value.to_bytes(max(width * n, (value.bit_length() + 7) // 8), "little")
    return [int.from_bytes(raw[i * width : (i + 1) * width], "little") for i in range(n)]


def divisor_power_sums(order: int, power: int) -> list[int]:
    """``sigma_power(n)`` for ``n = 0..order`` (entry 0 is 0), by sieving."""
    sig = [0] * (order + 1)
    for d in range(1, order + 1):
        dp = d**power
        for m in range(d, order + 1, d):
            sig[m] += dp
    return sig


def divisor_counts(order: int) -> np.ndarray:
    d = np.zeros(order + 1, dtype=np.int64)
    for k in range(1, order + 1):
        d[k::k] += 1
    return d


@lru_cache(maxsize=None)
def eisenstein(weight: int, order: int) -> PowerSeries:
    """Normalized Eisenstein series E4 or E6 to ``q**order``."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    if weight == 4:
        scale, power = 240, 3
    elif weight == 6:
        scale, power = -504, 5
    else:
        raise ValueError(f"only weights 4 and 6 are supported, got {weight}")
    sig = divisor_power_sums(order, power)
    return PowerSeries((1,) + tuple(scale * s for s in sig[1:]))


@lru_cache(maxsize=None)
def discriminant(order: int) -> PowerSeries:
    """``q * prod (1 - q**n)**24`` to ``q**order``.

    Uses Jacobi's identity ``prod (1 - q**n)**3 = sum (-1)**m (2m+1) q**(m(m+1)/2)``
    and raises the sparse result to the eighth power.
    """
    if order < 1:
        raise ValueError("the discriminant needs order >= 1")
    m = order - 1
    cube = [0] * (m + 1)
    j = 0
    while j * (j + 1) // 2 <= m:
        cube[j * (j + 1) // 2] = (-1) ** j * (2 * j + 1)
        j += 1
    eta24 = PowerSeries(tuple(cube)) ** 8
    return PowerSeries((0,) + eta24.coeffs)


@dataclass(frozen=True)
class CuspFormCoeffs:
    weight: int
    a: tuple[int, ...]  # a[0] is a_1
    normalized: np.ndarray = field(repr=False, compare=False)

    @property
    def order(self) -> int:
        return len(self.a)

    def coefficient(self, n: int) -> int:
        return self.a[n - 1]

    def deligne_violations(self) -> list[int]:
        """Indices n with ``|a_n| > d(n) n**((k-1)/2)``, checked exactly in integers."""
        d = divisor_counts(self.order)
        bad = []
        for n, an in enumerate(self.a, start=1):
            # |a_n|^2 <= d(n)^2 n^(k-1)
            if an * an > int(d[n]) ** 2 * n ** (self.weight - 1):
                bad.append(n)
        return bad

    def to_csv(self, path: str | Path) -> None:
        write_coefficients_csv(path, (0,) + self.a)


@lru_cache(maxsize=None)
def cusp_form(weight: int, order: int) -> CuspFormCoeffs:
    """Coefficients ``a_1..a_order`` of the normalized level-one eigenform of ``weight``.

    The generators are Delta, Delta*E6, Delta*E4*E6 and Delta*E4**2*E6.
    """
    if weight not in _GENERATORS:
        raise ValueError(
            f"unsupported weight {weight}; supported weights are {list(SUPPORTED_WEIGHTS)}"
        )
    if order < 1:
        raise ValueError("order must be >= 1")
    p4, p6 = _GENERATORS[weight]
    f = discriminant(order)
    if p4:
        f = f * eisenstein(4, order) ** p4
    if p6:
        f = f * eisenstein(6, order) ** p6
    a = f.coeffs[1:]
    n = np.arange(1, order + 1, dtype=float)
    normalized = np.array([float(x) for x in a]) * n ** (-(weight - 1) / 2.0)
    normalized.setflags(write=False)
    return CuspFormCoeffs(weight, a, normalized)


def write_coefficients_csv(path: str | Path, coeffs) -> None:
    """``n,a_n`` rows with exact decimal integers, skipping ``n = 0``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n", "a_n"])
        for n, c in enumerate(coeffs):
            if n:
                w.writerow([n, str(c)])
