"""Fractional parts of rho <h, phi(x, t)> for very large dilations rho."""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import mpmath
from mpmath import mp

from .constants import Real, as_coef, bits_of, is_exact, to_mpf
from .curvekit import CurveFamily, eval_mp

PRECISION_CAP_BITS = 4096
BASE_BITS = 64
GUARD_BITS = 16
TARGET_ERROR = 2.0**-50
TAGS = ("machine-real", "exact-integer", "integer-times-real")


class PrecisionError(RuntimeError):
    """The dilation needs more working precision than the configured cap."""


@dataclass(frozen=True)
class Dilation:
    """A dilation factor rho.

    ``exact-integer`` stores ``integer``; ``machine-real`` stores a float in
    ``factor``; ``integer-times-real`` is ``integer * factor`` with ``factor`` a
    :class:`Real` such as ``log(n)`` evaluated lazily at working precision.
    """

    tag: str
    integer: int = 0
    factor: Union[float, Real, None] = None

    def __post_init__(self):
        if self.tag not in TAGS:
            raise ValueError(f"unknown dilation tag {self.tag!r}")
        if self.tag == "machine-real" and not math.isfinite(float(self.factor)):
            raise ValueError("non-finite dilation")
        if self.tag == "integer-times-real" and not isinstance(self.factor, Real):
            object.__setattr__(self, "factor", as_coef(self.factor))

    @classmethod
    def exact(cls, k: int) -> "Dilation":
        return cls("exact-integer", integer=int(k))

    @classmethod
    def machine(cls, v: float) -> "Dilation":
        return cls("machine-real", factor=float(v))

    @classmethod
    def times_real(cls, k: int, factor) -> "Dilation":
        return cls("integer-times-real", integer=int(k), factor=factor)

    @property
    def is_zero(self) -> bool:
        if self.tag == "exact-integer":
            return self.integer == 0
        if self.tag == "machine-real":
            return self.factor == 0.0
        return self.integer == 0 or float(self.factor) == 0.0

    @property
    def magnitude_bits(self) -> int:
        """ceil(log2 |rho|), clamped at 0 for |rho| <= 1."""
        if self.tag == "exact-integer":
            k = abs(self.integer)
            return 0 if k <= 1 else (k - 1).bit_length()
        if self.tag == "machine-real":
            return bits_of(self.factor)
        k = abs(self.integer)
        f = abs(float(self.factor))
        if k == 0 or f == 0.0:
            return 0
        return max(0, math.ceil(math.log2(k) + math.log2(f)))

    def mp_value(self, prec: int):
        with mp.workprec(prec):
            if self.tag == "exact-integer":
                return mpmath.mpf(self.integer)
            if self.tag == "machine-real":
                return mpmath.mpf(self.factor)
            return mpmath.mpf(self.integer) * to_mpf(self.factor, prec)

    def __float__(self):
        return float(self.mp_value(64))

    def describe(self) -> str:
        if self.tag == "exact-integer":
            return str(self.integer)
        if self.tag == "machine-real":
            return repr(self.factor)
        return f"{self.integer}*{self.factor}"


@dataclass(frozen=True)
class ReducedPhase:
    """value in [0, 1); exact phases keep ``value`` as a Fraction."""

    value: Union[float, Fraction]
    error_bound: float
    degraded: bool = False
    exact: bool = False
    precision: int = 0


def _as_fraction(t) -> Fraction:
    if isinstance(t, Fraction):
        return t
    if isinstance(t, int):
        return Fraction(t)
    if isinstance(t, float):
        if not math.isfinite(t):
            raise ValueError("non-finite t")
        return Fraction(t)
    if isinstance(t, mpmath.mpf):
        return as_coef(t)
    raise TypeError(f"t must be rational, got {type(t).__name__}")


def exact_pairing(family: CurveFamily, h, t: Fraction) -> Fraction:
    """<h, phi(t)> in rational arithmetic for rational polynomial families."""
    total = Fraction(0)
    for hi, row in zip(h, family.terms):
        if hi:
            total += hi * sum((term.coef * t**term.degree for term in row), Fraction(0))
    return total


def exact_path_ok(family: CurveFamily, rho: Dilation) -> bool:
    return family.kind == "polynomial" and family.exact and rho.tag == "exact-integer"


def working_precision(family: CurveFamily, x, h, rho: Dilation, extra: int = 0) -> int:
    """P = 64 + magnitude_bits + 16, plus room for the size of <h, phi>."""
    mb = rho.magnitude_bits
    if mb > PRECISION_CAP_BITS:
        raise PrecisionError(f"dilation needs {mb} bits, cap is {PRECISION_CAP_BITS}")
    return BASE_BITS + mb + GUARD_BITS + _pairing_bits(family, h) + int(extra)


def _pairing_bits(family: CurveFamily, h) -> int:
    # crude but safe bound on log2 of |<h, phi>| for polynomial/trig kinds
    hn = sum(abs(int(v)) for v in h)
    if family.kind == "composed-affine":
        return bits_of(hn) + 8
    scale = 0.0
    for row in family.terms:
        scale = max(scale, sum(abs(float(term.coef)) for term in row))
    return bits_of(hn * max(scale, 1.0)) + 2


def reduced_phase(
    family: CurveFamily, x, h, rho: Dilation, t, extra_prec: int = 0
) -> ReducedPhase:
    h = tuple(int(v) for v in h)
    if len(h) != family.d:
        raise ValueError("h has wrong dimension")
    tq = _as_fraction(t)
    if tq.denominator > 2**63:
        raise ValueError("t must have denominator <= 2^63")
    if rho.is_zero or not any(h):
        return ReducedPhase(Fraction(0), 0.0, exact=True)
    if exact_path_ok(family, rho):
        v = rho.integer * exact_pairing(family, h, tq)
        return ReducedPhase(v - math.floor(v), 0.0, exact=True)
    prec = working_precision(family, x, h, rho, extra_prec)
    with mp.workprec(prec):
        tm = mpmath.mpf(tq.numerator) / tq.denominator
        vals = eval_mp(family, x, tm, prec)
        s = mpmath.fsum(hi * v for hi, v in zip(h, vals) if hi)
        y = rho.mp_value(prec) * s
        frac = y - mpmath.floor(y)
        err = max(abs(float(y)), 1.0) * 2.0 ** (6 - prec)
        value = float(frac)
    if value >= 1.0:  # rounding of frac just below 1
        value = 0.0
    err += 2.0**-53
    return ReducedPhase(value, err, degraded=err > TARGET_ERROR, precision=prec)


def unit_character(p: Union[ReducedPhase, float, Fraction]) -> complex:
    """e(value) = exp(2 pi i value)."""
    v = p.value if isinstance(p, ReducedPhase) else p
    if v == 0:
        return complex(1.0, 0.0)
    if isinstance(v, Fraction):
        with mp.workprec(80):
            a = mpmath.mpf(v.numerator) / v.denominator
            return complex(float(mpmath.cospi(2 * a)), float(mpmath.sinpi(2 * a)))
    return cmath.exp(2j * math.pi * float(v))
