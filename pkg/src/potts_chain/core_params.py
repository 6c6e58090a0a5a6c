"""Scalar model parameters and their interconversions.

Everything is derived from the crossing angle ``gamma``; no other parameter is
stored independently, so different conventions cannot drift apart.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

KINT_TOL = 1e-12


class DomainError(ValueError):
    """Raised when a parameter lies outside the supported regime."""


@dataclass(frozen=True)
class Coupling:
    """Couplings of the critical antiferromagnetic regime, 0 < gamma < pi/2.

    ``jimbo_k`` is the multiplicative parameter exp(2i gamma) of the block
    R-matrix, while ``k_int`` is the integer level with gamma = pi / k_int
    (only set when that relation holds to 1e-12).
    """

    gamma: float
    k_int: int | None = None
    exact: bool = False
    pi_multiple: Fraction | None = field(default=None, compare=False)

    @property
    def gamma0(self) -> float:
        return math.pi - 2.0 * self.gamma

    @property
    def q_def(self) -> complex:
        return complex(np.exp(1j * self.gamma))

    @property
    def sqrtQ(self) -> float:
        return 2.0 * math.cos(self.gamma)

    @property
    def jimbo_k(self) -> complex:
        return complex(np.exp(2j * self.gamma))

    @property
    def anisotropy_note(self) -> str:
        if self.k_int is None:
            return "generic"
        return "exact" if self.exact else "approximate"

    def to_json(self) -> dict:
        k = self.jimbo_k
        return {
            "gamma": self.gamma,
            "gamma0": self.gamma0,
            "sqrtQ": self.sqrtQ,
            "jimbo_k": [k.real, k.imag],
            "k_int": self.k_int,
        }


@dataclass(frozen=True)
class SpectralPoint:
    """Spectral parameter u together with u0 = -2u and x = exp(2iu)."""

    u: complex

    @property
    def u0(self) -> complex:
        return -2.0 * self.u

    @property
    def x(self) -> complex:
        return complex(np.exp(-1j * self.u0))


def _detect_kint(gamma: float):
    ratio = math.pi / gamma
    n = round(ratio)
    if n >= 1 and abs(ratio - n) < KINT_TOL * max(1.0, ratio):
        return int(n)
    return None


def coupling_from_gamma(gamma: float) -> Coupling:
    """Validated coupling for a crossing angle in (0, pi/2)."""
    gamma = float(gamma)
    if not (0.0 < gamma < math.pi / 2) or not math.isfinite(gamma):
        raise DomainError(f"gamma={gamma!r} outside the critical range (0, pi/2)")
    kint = _detect_kint(gamma)
    return Coupling(gamma=gamma, k_int=kint, exact=False)


def coupling_from_k(k_int: int) -> Coupling:
    """Coupling with gamma = pi/k_int exactly; k_int must be at least 3."""
    k_int = int(k_int)
    if k_int < 3:
        raise DomainError(f"k_int={k_int} must be >= 3 (gamma < pi/2)")
    return Coupling(gamma=math.pi / k_int, k_int=k_int, exact=True,
                    pi_multiple=Fraction(1, k_int))


_PI_FRAC = re.compile(r"^\s*(\d*)\s*\*?\s*pi\s*(?:/\s*(\d+))?\s*$")


def parse_angle(text) -> Coupling:
    """Parse ``pi/5``, ``2pi/11``, ``pi`` multiples or a plain decimal."""
    if isinstance(text, (int, float)):
        return coupling_from_gamma(float(text))
    m = _PI_FRAC.match(str(text).lower())
    if m is None:
        return coupling_from_gamma(float(text))
    num = int(m.group(1)) if m.group(1) else 1
    den = int(m.group(2)) if m.group(2) else 1
    frac = Fraction(num, den)
    if frac.numerator == 1:
        if frac.denominator < 3:
            raise DomainError(f"{text!r} outside the critical range (0, pi/2)")
        return coupling_from_k(frac.denominator)
    c = coupling_from_gamma(math.pi * float(frac))
    return Coupling(gamma=c.gamma, k_int=c.k_int, exact=False, pi_multiple=frac)


def spectral_point(u: complex) -> SpectralPoint:
    return SpectralPoint(complex(u))
