"""Exact and high-precision coefficients.

Curve coefficients are either exact rationals (``fractions.Fraction``) or
:class:`Real` constants, i.e. closed-form expressions such as ``sqrt(2)`` that
can be re-evaluated at any working precision.  Floats are accepted too and are
treated as the exact binary rational they denote.
"""
from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Union

import mpmath
from mpmath import mp

_FUNCS = {
    "sqrt": mpmath.sqrt,
    "cbrt": mpmath.cbrt,
    "log": mpmath.log,
    "exp": mpmath.exp,
    "sin": mpmath.sin,
    "cos": mpmath.cos,
    "sinpi": mpmath.sinpi,
    "cospi": mpmath.cospi,
}
_NAMES = {"pi": lambda: +mp.pi, "e": lambda: +mp.e}


def _walk(node):
    if isinstance(node, ast.Expression):
        return _walk(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return mpmath.mpf(node.value)
    if isinstance(node, ast.Name) and node.id in _NAMES:
        return _NAMES[node.id]()
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _walk(node.operand)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        a, b = _walk(node.left), _walk(node.right)
        op = type(node.op)
        if op is ast.Add:
            return a + b
        if op is ast.Sub:
            return a - b
        if op is ast.Mult:
            return a * b
        if op is ast.Div:
            return a / b
        if op is ast.Pow:
            return a**b
    if (
        isinstance(node, ast.Call)
        and isinstance(node.func, ast.Name)
        and node.func.id in _FUNCS
        and not node.keywords
    ):
        return _FUNCS[node.func.id](*[_walk(a) for a in node.args])
    raise ValueError(f"unsupported expression element: {ast.dump(node)}")


@dataclass(frozen=True)
class Real:
    """A real constant given by an arithmetic expression, e.g. ``Real("sqrt(2)")``.

    Allowed names: ``pi``, ``e`` and the functions sqrt, cbrt, log, exp,
    sin, cos, sinpi, cospi.
    """

    expr: str

    def __post_init__(self):
        # validates eagerly
        v = _evaluate(self.expr, 64)
        if not mpmath.isfinite(v):
            raise ValueError(f"non-finite constant {self.expr!r}")

    def mp_value(self, prec: int) -> mpmath.mpf:
        return _evaluate(self.expr, max(int(prec), 53))

    def __float__(self):
        return float(self.mp_value(80))

    def __str__(self):
        return self.expr


@lru_cache(maxsize=4096)
def _evaluate(expr: str, prec: int):
    with mp.workprec(prec + 20):
        v = _walk(ast.parse(expr, mode="eval"))
    with mp.workprec(prec):
        return +v


Coef = Union[Fraction, int, float, Real]


def as_coef(value) -> Coef:
    """Normalise user input to a coefficient: ints and rational strings become
    Fractions, other strings become :class:`Real` expressions."""
    if isinstance(value, (Fraction, Real)):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError("coefficient must be finite")
        return value
    if isinstance(value, str):
        s = value.strip()
        try:
            return Fraction(s)
        except ValueError:
            return Real(s)
    if isinstance(value, mpmath.mpf):
        if not mpmath.isfinite(value):
            raise ValueError("coefficient must be finite")
        return _mpf_to_fraction(value)
    raise TypeError(f"cannot use {type(value).__name__} as a coefficient")


def _mpf_to_fraction(v) -> Fraction:
    man, exp = v.man, v.exp
    if exp >= 0:
        return Fraction(int(man) << exp)
    return Fraction(int(man), 1 << -exp)


def is_exact(c) -> bool:
    return isinstance(c, (Fraction, int)) and not isinstance(c, bool)


def to_mpf(c, prec: int):
    """Value of a coefficient as an mpf rounded to ``prec`` bits."""
    with mp.workprec(prec):
        if isinstance(c, Real):
            return c.mp_value(prec)
        if isinstance(c, Fraction):
            return mpmath.mpf(c.numerator) / c.denominator
        if isinstance(c, (int, float)):
            return mpmath.mpf(c)
        if isinstance(c, mpmath.mpf):
            return +c
    raise TypeError(f"not a coefficient: {c!r}")


def bits_of(c) -> int:
    """Rough ceil(log2 |c|), at least 0."""
    v = abs(float(c)) if not isinstance(c, Fraction) else abs(c.numerator) / c.denominator
    if v <= 1:
        return 0
    return int(math.ceil(math.log2(v)))


def coef_str(c) -> str:
    if isinstance(c, Fraction):
        return str(c)
    return str(c) if isinstance(c, Real) else repr(c)
