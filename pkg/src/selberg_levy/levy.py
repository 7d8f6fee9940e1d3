"""The infinitely divisible law attached to an instance.

The exponent is

    g_F(t) = -(m0/2) t^2 + i B_F t + sum_gamma m_gamma (e^{-i gamma t} - 1) / gamma^2,

so the triplet in the compensator-free form is ``a = m0``, drift ``B_F`` and
atoms of mass ``m_gamma / gamma^2`` at ``-gamma``.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np

from .lfunc import SelbergData, get_instance
from .zeros import CentralData, ZeroList, central_multiplicity, instance_zeros, tail_integral

log = logging.getLogger(__name__)

COMPOUND_POISSON = "compound-poisson"
GAUSSIAN_PLUS_CP = "gaussian-plus-compound-poisson"
SELF_DUAL_DRIFT_TOL = 1e-6


@dataclass(frozen=True)
class LevyTriplet:
    gaussian_cov: float
    drift: float
    locations: np.ndarray
    masses: np.ndarray
    truncation_height: float = math.inf
    tail_mass: float = 0.0
    drift_imag: float = 0.0  # diagnostic only; zero for self-dual instances
    name: str = ""

    def __post_init__(self):
        loc = np.asarray(self.locations, dtype=float)
        mass = np.asarray(self.masses, dtype=float)
        if loc.shape != mass.shape or loc.ndim != 1:
            raise ValueError("locations and masses must be aligned 1-d arrays")
        if np.any(loc == 0):
            raise ValueError("the Levy measure cannot charge 0")
        if np.any(mass <= 0) or not np.all(np.isfinite(mass)):
            raise ValueError("atom masses must be positive and finite")
        if self.gaussian_cov < 0:
            raise ValueError("Gaussian covariance must be nonnegative")
        order = np.argsort(loc, kind="stable")
        loc, mass = loc[order], mass[order]
        loc.setflags(write=False)
        mass.setflags(write=False)
        object.__setattr__(self, "locations", loc)
        object.__setattr__(self, "masses", mass)

    @property
    def atoms(self) -> list[tuple[float, float]]:
        return list(zip(self.locations.tolist(), self.masses.tolist()))

    @property
    def total_mass(self) -> float:
        return float(self.masses.sum())

    @property
    def center(self) -> float:
        """Center ``b`` of the compensated form: ``b0 + sum mass * lam / (1 + lam^2)``."""
        lam = self.locations
        return self.drift + float(np.sum(self.masses * lam / (1 + lam**2)))

    def __add__(self, other: "LevyTriplet") -> "LevyTriplet":
        loc = np.concatenate([self.locations, other.locations])
        mass = np.concatenate([self.masses, other.masses])
        uniq, inv = np.unique(loc, return_inverse=True)
        merged = np.bincount(inv, weights=mass, minlength=uniq.size)
        return LevyTriplet(
            self.gaussian_cov + other.gaussian_cov,
            self.drift + other.drift,
            uniq,
            merged,
            min(self.truncation_height, other.truncation_height),
            self.tail_mass + other.tail_mass,
            self.drift_imag + other.drift_imag,
            f"{self.name}*{other.name}" if self.name and other.name else "",
        )

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "a": self.gaussian_cov,
            "b0": self.drift,
            "atoms": [[float(x), float(m)] for x, m in self.atoms],
            "T": self.truncation_height,
            "tail": self.tail_mass,
            "classification": classify(self),
        }

    def to_json(self, path: str | Path | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=1)
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_dict(cls, d: dict) -> "LevyTriplet":
        atoms = np.asarray(d.get("atoms") or np.empty((0, 2)), dtype=float).reshape(-1, 2)
        return cls(
            float(d["a"]),
            float(d["b0"]),
            atoms[:, 0],
            atoms[:, 1],
            float(d.get("T", math.inf)),
            float(d.get("tail", 0.0)),
            name=d.get("name", ""),
        )

    @classmethod
    def from_json(cls, text: str) -> "LevyTriplet":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class GFSample:
    t: float
    value: complex
    truncation_height: float
    tail_bound: float


# ---------------------------------------------------------------------------


def compute_BF(F: SelbergData, central: CentralData | None = None) -> complex:
    """``i xi^(m0+1)(1/2) / ((m0+1) xi^(m0)(1/2))``, the linear Hadamard coefficient.

    Reduces to ``i (xi'/xi)(1/2)`` without a central zero. Product instances
    return the sum over their factors.
    """
    if F.factors:
        return sum(compute_BF(f) for f in F.factors)
    central = central or central_multiplicity(F)
    c = central.taylor
    m0 = central.m0
    return complex(1j * c[m0 + 1] / c[m0])


def levy_measure(zeros: ZeroList) -> tuple[np.ndarray, np.ndarray]:
    """Atoms ``(-gamma, m/gamma^2)``; mirrored to ``+gamma`` when the zero set is symmetric."""
    g = zeros.ordinates
    if np.any(g == 0):
        raise ValueError("the central zero is not part of the Levy measure")
    m = zeros.multiplicities.astype(float)
    loc = -g
    mass = m / g**2
    if zeros.symmetric:
        loc = np.concatenate([loc, g])
        mass = np.concatenate([mass, mass])
    return loc, mass


def tail_mass_estimate(F: SelbergData, T: float, symmetric: bool = True) -> float:
    """Mass of the omitted atoms beyond height T from the smooth zero density."""
    if not math.isfinite(T):
        return 0.0
    one_side = tail_integral(F, T, lambda u: u**-2.0)
    return (2.0 if symmetric else 1.0) * one_side


def build_triplet(F: SelbergData, zeros: ZeroList, central: CentralData | None = None) -> LevyTriplet:
    central = central or central_multiplicity(F)
    B = compute_BF(F, central)
    drift = float(B.real)
    if F.self_dual_sign is not None:
        # xi(1/2 + u) = omega xi(1/2 - u) kills c_{m0+1}, so B_F = 0 exactly;
        # keep the computed value only if it is too large to be rounding
        if abs(B) > SELF_DUAL_DRIFT_TOL:
            log.warning("%s: self-dual but B_F = %s", F.name, B)
        else:
            log.debug("%s: computed B_F = %s set to 0 by symmetry", F.name, B)
            drift = 0.0
    loc, mass = levy_measure(zeros)
    return LevyTriplet(
        float(central.m0),
        drift,
        loc,
        mass,
        zeros.height_bound,
        tail_mass_estimate(F, zeros.height_bound, zeros.symmetric),
        float(B.imag),
        F.name,
    )


@lru_cache(maxsize=32)
def instance_triplet(name: str, T: float, zero_table: str | None = None) -> LevyTriplet:
    F = get_instance(name)
    return build_triplet(F, instance_zeros(name, T, zero_table))


def g_values(triplet: LevyTriplet, t) -> np.ndarray:
    """Exponent ``-(a/2)t^2 + i b0 t + sum mass (e^{i t lam} - 1)`` on an array of t."""
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out = np.empty(flat.shape, dtype=complex)
    lam, mass = triplet.locations, triplet.masses
    for i in range(0, flat.size, 2048):
        tt = flat[i : i + 2048]
        phase = np.multiply.outer(tt, lam)
        jumps = _expm1i(phase) @ mass
        out[i : i + 2048] = -0.5 * triplet.gaussian_cov * tt**2 + 1j * triplet.drift * tt + jumps
    return out.reshape(t.shape)


def _expm1i(x: np.ndarray) -> np.ndarray:
    # e^{ix} - 1 = 2i sin(x/2) e^{ix/2}, accurate for small x
    half = 0.5 * x
    return 2j * np.sin(half) * np.exp(1j * half)


def tail_bound(triplet: LevyTriplet, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    T = triplet.truncation_height
    if not math.isfinite(T):
        return np.zeros_like(t)
    return 2.0 * triplet.tail_mass * np.minimum(1.0, t**2 * T**2 / 4.0)


def g_eval(F: SelbergData | None, triplet: LevyTriplet, t: float) -> GFSample:
    """One sample of g_F. ``F`` is accepted for symmetry with the other operations but unused."""
    if abs(t) > 1e3:
        raise ValueError("|t| must be <= 1e3")
    return GFSample(
        float(t),
        complex(g_values(triplet, t)),
        triplet.truncation_height,
        float(tail_bound(triplet, t)),
    )


def char_fn(triplet: LevyTriplet, t):
    """``exp(g)``: the characteristic function of the time-one law."""
    return np.exp(g_values(triplet, t))


def classify(triplet: LevyTriplet) -> str:
    return GAUSSIAN_PLUS_CP if triplet.gaussian_cov > 0 else COMPOUND_POISSON


def describe(triplet: LevyTriplet) -> dict:
    """Classification with the drift reported separately."""
    label = classify(triplet)
    note = ""
    if triplet.total_mass == 0 and triplet.gaussian_cov == 0:
        note = "pure drift" if triplet.drift != 0 else "degenerate at 0"
    return {"label": label, "gaussian_cov": triplet.gaussian_cov, "drift": triplet.drift, "note": note}
