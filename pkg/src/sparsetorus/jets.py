"""Truncated Taylor series (jets) for higher-order derivatives of composed curves.

A :class:`Jet` of order K stores normalised Taylor coefficients
``c[k] = f^(k)(t0) / k!`` for k = 0..K.  Coefficients may be mpmath numbers,
Python floats or numpy arrays (one jet per sample point, evaluated in bulk).

Curve functions for composed families are written with the elementary
functions exported here (``sin``, ``cos``, ``sinpi``, ``cospi``, ``exp``); they
accept plain scalars, numpy arrays and jets alike.
"""
from __future__ import annotations

import math

import mpmath
import numpy as np


def _is_mp(v):
    return isinstance(v, (mpmath.mpf, mpmath.mpc))


def _base(name, v):
    if isinstance(v, np.ndarray):
        if name == "sinpi":
            return np.sin(np.pi * v)
        if name == "cospi":
            return np.cos(np.pi * v)
        return getattr(np, name)(v)
    if _is_mp(v):
        return getattr(mpmath, name)(v)
    return float(getattr(mpmath, name)(v)) if name in ("sinpi", "cospi") else getattr(math, name)(v)


def _pi_like(v):
    if _is_mp(v):
        return +mpmath.mp.pi
    return math.pi


class Jet:
    __slots__ = ("c",)
    __array_priority__ = 1000  # keep numpy from broadcasting over a Jet

    def __init__(self, coeffs):
        self.c = list(coeffs)

    @classmethod
    def variable(cls, t0, order: int):
        """The identity jet t0 + h, truncated at ``order``."""
        zero = t0 * 0
        coeffs = [t0] + [zero + 1] + [zero] * (order - 1) if order >= 1 else [t0]
        return cls(coeffs)

    @property
    def order(self):
        return len(self.c) - 1

    def derivative(self, j: int):
        return self.c[j] * math.factorial(j)

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        zero = self.c[0] * 0
        return Jet([zero + other] + [zero] * self.order)

    def __add__(self, other):
        o = self._lift(other)
        return Jet([a + b for a, b in zip(self.c, o.c)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-a for a in self.c])

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        if not isinstance(other, Jet):
            return Jet([a * other for a in self.c])
        K = self.order
        out = []
        for k in range(K + 1):
            acc = self.c[0] * other.c[k]
            for i in range(1, k + 1):
                acc = acc + self.c[i] * other.c[k - i]
            out.append(acc)
        return Jet(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return Jet([a / other for a in self.c])
        # q * other = self, solved order by order
        K = self.order
        q = []
        for k in range(K + 1):
            acc = self.c[k]
            for i in range(1, k + 1):
                acc = acc - other.c[i] * q[k - i]
            q.append(acc / other.c[0])
        return Jet(q)

    def __rtruediv__(self, other):
        return self._lift(other) / self

    def __pow__(self, p: int):
        if not isinstance(p, int) or p < 0:
            raise ValueError("only non-negative integer powers of jets")
        out = self._lift(1)
        for _ in range(p):
            out = out * self
        return out

    def __repr__(self):
        return f"Jet({self.c!r})"


def _sincos(u: Jet, scale):
    """Jets of sin(scale*u) and cos(scale*u)."""
    K = u.order
    a = [ci * scale for ci in u.c]
    s = [_base("sin", a[0])]
    c = [_base("cos", a[0])]
    for k in range(1, K + 1):
        ds = a[1] * c[k - 1]
        dc = a[1] * s[k - 1]
        for i in range(2, k + 1):
            ds = ds + i * a[i] * c[k - i]
            dc = dc + i * a[i] * s[k - i]
        s.append(ds / k)
        c.append(-dc / k)
    return Jet(s), Jet(c)


def sin(u):
    return _sincos(u, 1)[0] if isinstance(u, Jet) else _base("sin", u)


def cos(u):
    return _sincos(u, 1)[1] if isinstance(u, Jet) else _base("cos", u)


def sinpi(u):
    """sin(pi*u), exact-argument friendly for mpmath inputs."""
    if isinstance(u, Jet):
        s, _ = _sincos(u, _pi_like(u.c[0]))
        # keep the constant term on the accurate sinpi path
        s.c[0] = _base("sinpi", u.c[0])
        return s
    return _base("sinpi", u)


def cospi(u):
    if isinstance(u, Jet):
        _, c = _sincos(u, _pi_like(u.c[0]))
        c.c[0] = _base("cospi", u.c[0])
        return c
    return _base("cospi", u)


def exp(u):
    if not isinstance(u, Jet):
        return _base("exp", u)
    K = u.order
    e = [_base("exp", u.c[0])]
    for k in range(1, K + 1):
        acc = u.c[1] * e[k - 1]
        for i in range(2, k + 1):
            acc = acc + i * u.c[i] * e[k - i]
        e.append(acc / k)
    return Jet(e)
