"""Analytic curve families phi(x, t) in R^d, their t-derivatives and RND order.

Three kinds are supported:

``polynomial``
    every coordinate is sum_k c_k t^k with exact-rational or Real coefficients.
``trig-polynomial``
    every coordinate is sum_f a_f cos(2 pi f t) + b_f sin(2 pi f t); the family is
    closed (1-periodic) when all frequencies are integers.
``composed-affine``
    a user function ``fn(x, t)`` built from the elementary functions in
    :mod:`sparsetorus.jets`, typically a base curve followed by an x-dependent
    linear map.  Derivatives come from Taylor-mode jets and zero tests are
    numerical.
"""
from __future__ import annotations

import configparser
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import mpmath
import numpy as np
from mpmath import mp

from . import jets
from .constants import Real, as_coef, coef_str, is_exact, to_mpf

KINDS = ("polynomial", "trig-polynomial", "composed-affine")
J_MAX_DEFAULT = 16
H_DEFAULT = 5
ZERO_REL_TOL = 2.0**-40
CHEB_POINTS = 257
EVAL_PREC = 96


class OrderError(ValueError):
    """Requested derivative order exceeds the family's J_max."""


@dataclass(frozen=True)
class PolyTerm:
    degree: int
    coef: object


@dataclass(frozen=True)
class TrigTerm:
    basis: str  # "cos" or "sin"
    freq: Fraction
    coef: object


@dataclass(frozen=True, eq=False)
class CurveFamily:
    kind: str
    d: int
    m: int = 0
    terms: tuple = ()
    fn: Optional[Callable] = None
    name: str = "custom"
    closed: Optional[bool] = None
    j_max: int = J_MAX_DEFAULT

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}")
        if self.d < 1 or self.m < 0:
            raise ValueError("need d >= 1 and m >= 0")
        if self.kind == "composed-affine":
            if self.fn is None:
                raise ValueError("composed-affine family needs fn")
            object.__setattr__(self, "closed", bool(self.closed))
            return
        if len(self.terms) != self.d:
            raise ValueError(f"expected {self.d} coordinate term lists, got {len(self.terms)}")
        norm = []
        for coord in self.terms:
            row = []
            for term in coord:
                if self.kind == "polynomial":
                    if not isinstance(term, PolyTerm):
                        term = PolyTerm(*term)
                    if term.degree < 0:
                        raise ValueError("negative degree")
                    row.append(PolyTerm(int(term.degree), as_coef(term.coef)))
                else:
                    if not isinstance(term, TrigTerm):
                        term = TrigTerm(*term)
                    if term.basis not in ("cos", "sin"):
                        raise ValueError(f"trig basis must be cos or sin, got {term.basis!r}")
                    row.append(TrigTerm(term.basis, Fraction(term.freq), as_coef(term.coef)))
            norm.append(tuple(row))
        object.__setattr__(self, "terms", tuple(norm))
        if self.kind == "trig-polynomial":
            closed = all(t.freq.denominator == 1 for row in self.terms for t in row)
        else:
            closed = False
        object.__setattr__(self, "closed", closed)

    @property
    def exact(self) -> bool:
        """True when every coefficient is an exact rational."""
        if self.kind == "composed-affine":
            return False
        return all(is_exact(t.coef) for row in self.terms for t in row)

    def degree(self) -> int:
        if self.kind != "polynomial":
            raise TypeError("degree only defined for polynomial families")
        return max((t.degree for row in self.terms for t in row), default=0)


# ---------------------------------------------------------------- evaluation


def _check_x(family: CurveFamily, x):
    x = tuple(x) if x is not None else ()
    if len(x) != family.m:
        raise ValueError(f"x has length {len(x)}, family expects m={family.m}")
    for v in x:
        if not math.isfinite(float(v)):
            raise ValueError("non-finite parameter")
    return x


def eval_mp(family: CurveFamily, x, t, prec: int = EVAL_PREC):
    """phi(x, t) as a list of mpf at ``prec`` bits; t may be a Fraction."""
    x = _check_x(family, x)
    with mp.workprec(prec):
        tm = to_mpf(t, prec) if not isinstance(t, mpmath.mpf) else +t
        if family.kind == "polynomial":
            out = []
            for row in family.terms:
                acc = mpmath.mpf(0)
                for term in row:
                    acc += to_mpf(term.coef, prec) * tm**term.degree
                out.append(acc)
            return out
        if family.kind == "trig-polynomial":
            out = []
            for row in family.terms:
                acc = mpmath.mpf(0)
                for term in row:
                    arg = 2 * to_mpf(term.freq, prec) * tm
                    base = mpmath.cospi(arg) if term.basis == "cos" else mpmath.sinpi(arg)
                    acc += to_mpf(term.coef, prec) * base
                out.append(acc)
            return out
        xs = [to_mpf(v, prec) for v in x]
        vals = family.fn(xs, tm)
        return [+mpmath.mpf(v) for v in vals]


def eval(family: CurveFamily, x, t) -> np.ndarray:
    """phi(x, t) as floats."""
    if not math.isfinite(float(t)):
        raise ValueError("non-finite t")
    return np.array([float(v) for v in eval_mp(family, x, t)])


def eval_many(family: CurveFamily, x, ts) -> np.ndarray:
    """Vectorised float evaluation; returns an array of shape (len(ts), d)."""
    x = _check_x(family, x)
    ts = np.asarray(ts, dtype=float)
    if family.kind == "composed-affine":
        vals = family.fn([float(v) for v in x], ts)
        return np.stack([np.broadcast_to(np.asarray(v, dtype=float), ts.shape) for v in vals], axis=-1)
    return derivative_many(family, x, ts, 0)


def _poly_deriv_coef(term: PolyTerm, j: int):
    """(new degree, multiplier) for d^j/dt^j of t^degree, or None if it vanishes."""
    if j > term.degree:
        return None
    return term.degree - j, math.perm(term.degree, j)


def _trig_deriv(a, b, j: int):
    """Rotate (cos coef, sin coef) by j derivatives, without the (2 pi f)^j factor."""
    for _ in range(j % 4):
        a, b = b, -a
    return a, b


def _check_order(family, j):
    if j < 0:
        raise ValueError("derivative order must be non-negative")
    if j > family.j_max:
        raise OrderError(f"order {j} exceeds J_max={family.j_max}")


def derivative_mp(family: CurveFamily, x, t, j: int, prec: int = EVAL_PREC):
    _check_order(family, j)
    if j == 0:
        return eval_mp(family, x, t, prec)
    x = _check_x(family, x)
    with mp.workprec(prec):
        tm = to_mpf(t, prec)
        if family.kind == "polynomial":
            out = []
            for row in family.terms:
                acc = mpmath.mpf(0)
                for term in row:
                    r = _poly_deriv_coef(term, j)
                    if r is not None:
                        acc += to_mpf(term.coef, prec) * r[1] * tm ** r[0]
                out.append(acc)
            return out
        if family.kind == "trig-polynomial":
            out = []
            for row in family.terms:
                acc = mpmath.mpf(0)
                for term in row:
                    if term.freq == 0:
                        continue
                    f = to_mpf(term.freq, prec)
                    a, b = (1, 0) if term.basis == "cos" else (0, 1)
                    a, b = _trig_deriv(a, b, j)
                    arg = 2 * f * tm
                    val = a * mpmath.cospi(arg) + b * mpmath.sinpi(arg)
                    acc += to_mpf(term.coef, prec) * (2 * mp.pi * f) ** j * val
                out.append(acc)
            return out
        xs = [to_mpf(v, prec) for v in x]
        vals = family.fn(xs, jets.Jet.variable(tm, j))
        return [v.derivative(j) if isinstance(v, jets.Jet) else mpmath.mpf(0) for v in vals]


def derivative(family: CurveFamily, x, t, j: int) -> np.ndarray:
    """j-th t-derivative of phi(x, .) at t, as floats."""
    if not math.isfinite(float(t)):
        raise ValueError("non-finite t")
    return np.array([float(v) for v in derivative_mp(family, x, t, j)])


def derivative_many(family: CurveFamily, x, ts, j: int) -> np.ndarray:
    """Vectorised float derivatives, shape (len(ts), d)."""
    _check_order(family, j)
    x = _check_x(family, x)
    ts = np.asarray(ts, dtype=float)
    out = np.zeros(ts.shape + (family.d,))
    if family.kind == "polynomial":
        for i, row in enumerate(family.terms):
            for term in row:
                r = _poly_deriv_coef(term, j)
                if r is not None:
                    out[..., i] += float(term.coef) * r[1] * ts ** r[0]
        return out
    if family.kind == "trig-polynomial":
        for i, row in enumerate(family.terms):
            for term in row:
                f = float(term.freq)
                if f == 0 and j > 0:
                    continue
                a, b = (1, 0) if term.basis == "cos" else (0, 1)
                a, b = _trig_deriv(a, b, j)
                arg = 2 * np.pi * f * ts
                out[..., i] += float(term.coef) * (2 * np.pi * f) ** j * (a * np.cos(arg) + b * np.sin(arg))
        return out
    xf = [float(v) for v in x]
    if j == 0:
        return eval_many(family, x, ts)
    vals = family.fn(xf, jets.Jet.variable(ts, j))
    for i, v in enumerate(vals):
        out[..., i] = v.derivative(j) if isinstance(v, jets.Jet) else 0.0
    return out


def jet_table(family: CurveFamily, x, ts, order: int) -> np.ndarray:
    """All derivatives 0..order at once: array of shape (order+1, len(ts), d)."""
    ts = np.asarray(ts, dtype=float)
    if family.kind != "composed-affine":
        return np.stack([derivative_many(family, x, ts, j) for j in range(order + 1)])
    _check_order(family, order)
    x = _check_x(family, x)
    vals = family.fn([float(v) for v in x], jets.Jet.variable(ts, order))
    out = np.zeros((order + 1,) + ts.shape + (family.d,))
    for i, v in enumerate(vals):
        if isinstance(v, jets.Jet):
            for j in range(order + 1):
                out[j, ..., i] = v.derivative(j)
        else:
            out[0, ..., i] = v
    return out


# ------------------------------------------------------------------- pairing


@dataclass(frozen=True)
class PairingSeries:
    """Coefficient form of t -> <h, d^j/dt^j phi(x, t)>.

    ``terms`` holds ``(degree, coef)`` pairs for polynomial families and
    ``(freq, a, b)`` triples for trig families, the latter meaning
    ``(2 pi f)^j (a cos 2 pi f t + b sin 2 pi f t)``.  Composed families have
    no closed coefficient form; ``samples`` then holds the values on the
    Chebyshev grid and ``numerical`` is set.
    """

    h: tuple
    j: int
    kind: str
    terms: tuple
    zero_flag: bool
    exact: bool
    numerical: bool = False
    samples: tuple = ()

    def __call__(self, t) -> float:
        if self.kind == "polynomial":
            return float(sum(float(c) * t**k for k, c in self.terms))
        if self.kind == "trig-polynomial":
            s = 0.0
            for f, a, b in self.terms:
                w = 2 * math.pi * float(f)
                s += w**self.j * (float(a) * math.cos(w * t) + float(b) * math.sin(w * t))
            return s
        raise TypeError("composed pairings are sampled; use the family directly")


def _combine(h, coefs):
    """sum_i h_i c_i; exact if every c_i is exact, else (mpf, scale)."""
    if all(is_exact(c) for c in coefs):
        return sum((hi * Fraction(c) for hi, c in zip(h, coefs)), Fraction(0)), None
    with mp.workprec(128):
        vals = [to_mpf(c, 128) for c in coefs]
        total = mpmath.fsum(hi * v for hi, v in zip(h, vals))
        scale = mpmath.fsum(abs(hi) * abs(v) for hi, v in zip(h, vals))
    return total, scale


def _is_zero(value, scale) -> bool:
    if scale is None:
        return value == 0
    return abs(value) <= ZERO_REL_TOL * scale


def chebyshev_nodes(count: int = CHEB_POINTS) -> np.ndarray:
    k = np.arange(count)
    return 0.5 * (1.0 - np.cos(np.pi * k / (count - 1)))


def _composed_zero(values: np.ndarray, scales: np.ndarray) -> bool:
    s = float(np.max(scales)) if scales.size else 0.0
    if s == 0.0:
        return True
    return float(np.max(np.abs(values))) <= ZERO_REL_TOL * s


def pairing_series(family: CurveFamily, x, h, j: int) -> PairingSeries:
    h = tuple(int(v) for v in h)
    if len(h) != family.d:
        raise ValueError("h has wrong dimension")
    if not any(h):
        raise ValueError("h must be non-zero")
    _check_order(family, j)
    x = _check_x(family, x)
    if family.kind == "polynomial":
        by_deg: dict[int, list] = {}
        for i, row in enumerate(family.terms):
            for term in row:
                r = _poly_deriv_coef(term, j)
                if r is None:
                    continue
                c = term.coef * r[1] if is_exact(term.coef) else Real(f"({term.coef})*{r[1]}") if isinstance(term.coef, Real) else term.coef * r[1]
                by_deg.setdefault(r[0], [0] * family.d)
                slot = by_deg[r[0]]
                slot[i] = c if slot[i] == 0 else _add_coef(slot[i], c)
        terms, zero, exact = [], True, True
        for deg in sorted(by_deg):
            v, scale = _combine(h, by_deg[deg])
            exact &= scale is None
            if not _is_zero(v, scale):
                zero = False
            terms.append((deg, v))
        return PairingSeries(h, j, family.kind, tuple(terms), zero, exact)
    if family.kind == "trig-polynomial":
        by_f: dict[Fraction, list] = {}
        for i, row in enumerate(family.terms):
            for term in row:
                if term.freq == 0 and j > 0:
                    continue
                slot = by_f.setdefault(term.freq, [[0] * family.d, [0] * family.d])
                k = 0 if term.basis == "cos" else 1
                slot[k][i] = term.coef if slot[k][i] == 0 else _add_coef(slot[k][i], term.coef)
        terms, zero, exact = [], True, True
        for f in sorted(by_f):
            a, sa = _combine(h, by_f[f][0])
            b, sb = _combine(h, by_f[f][1])
            exact &= sa is None and sb is None
            if not (_is_zero(a, sa) and _is_zero(b, sb)):
                zero = False
            a, b = _trig_deriv(a, b, j)
            terms.append((f, a, b))
        return PairingSeries(h, j, family.kind, tuple(terms), zero, exact)
    ts = chebyshev_nodes()
    D = derivative_many(family, x, ts, j)
    hv = np.array(h, dtype=float)
    values = D @ hv
    scales = np.abs(D) @ np.abs(hv)
    return PairingSeries(
        h, j, family.kind, (), _composed_zero(values, scales), False, True, tuple(values.tolist())
    )


def _add_coef(a, b):
    if is_exact(a) and is_exact(b):
        return Fraction(a) + Fraction(b)
    return Real(f"({coef_str(a)})+({coef_str(b)})")


# ----------------------------------------------------------------- RND order


@dataclass(frozen=True)
class RndReport:
    kappa: Optional[int]  # None means ">= j_max"
    j_max: int
    H: int
    witness_h: Optional[tuple]
    witness_x: Optional[tuple]
    numerical: bool
    kappa_next: Optional[int] = None  # same search with box H+1
    witness_h_next: Optional[tuple] = None
    unstable: bool = False

    @property
    def at_least(self) -> bool:
        return self.kappa is None

    @property
    def label(self) -> str:
        if self.kappa is None:
            return f">= {self.j_max}"
        return str(self.kappa)


def half_box(d: int, H: int):
    """Non-zero h with ||h||_inf <= H, one representative of each pair {h, -h}."""
    out = []
    for h in itertools.product(range(-H, H + 1), repeat=d):
        if any(h) and h > tuple(-v for v in h):
            out.append(h)
    return out


def full_box(d: int, H: int):
    return [h for h in itertools.product(range(-H, H + 1), repeat=d) if any(h)]


def default_x_grid(m: int, per_axis: int = 17, cap: int = 17**2):
    if m == 0:
        return [()]
    axis = np.linspace(0.0, 1.0, per_axis)
    if per_axis**m <= cap:
        return [tuple(p) for p in itertools.product(axis.tolist(), repeat=m)]
    from scipy.stats import qmc

    pts = qmc.Halton(d=m, scramble=False).random(cap)
    return [tuple(p) for p in pts.tolist()]


def _search(family, H, j_max, x_grid):
    hs = half_box(family.d, H)
    if family.kind == "composed-affine":
        ts = chebyshev_nodes()
        hmat = np.array(hs, dtype=float).T
        best = (None, None, None)
        for x in x_grid:
            table = jet_table(family, x, ts, j_max)
            for j in range(1, j_max + 1):
                values = table[j] @ hmat
                scales = np.abs(table[j]) @ np.abs(hmat)
                top = np.max(scales, axis=0)
                dead = np.max(np.abs(values), axis=0) <= ZERO_REL_TOL * top
                dead |= top == 0
                if dead.any():
                    if best[0] is None or j - 1 < best[0]:
                        best = (j - 1, hs[int(np.argmax(dead))], tuple(x))
                    break
        return best
    # coefficients do not depend on x for these kinds
    x0 = tuple(x_grid[0])
    for j in range(1, j_max + 1):
        for h in hs:
            if pairing_series(family, x0, h, j).zero_flag:
                return j - 1, h, x0
    return None, None, None


def rnd_order(family: CurveFamily, H: int = H_DEFAULT, j_max: Optional[int] = None, x_grid=None) -> RndReport:
    """Estimate the RND order over the frequency box ||h||_inf <= H.

    kappa is the largest j <= j_max such that <h, phi^(j')(x, .)> is not
    identically zero for every j' <= j, every h in the box and every x in the
    grid.  Orders reaching j_max are reported as ``>= j_max``.  The search is
    repeated with box H+1 and disagreements are surfaced through ``unstable``.
    """
    if H < 1:
        raise ValueError("H must be >= 1")
    j_max = family.j_max if j_max is None else int(j_max)
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    if j_max > family.j_max:
        raise OrderError(f"j_max={j_max} exceeds the family's J_max={family.j_max}")
    x_grid = default_x_grid(family.m) if x_grid is None else [tuple(x) for x in x_grid]
    if not x_grid:
        raise ValueError("empty x_grid")
    for x in x_grid:
        _check_x(family, x)
    kappa, wh, wx = _search(family, H, j_max, x_grid)
    kappa2, wh2, _ = _search(family, H + 1, j_max, x_grid)
    return RndReport(
        kappa=kappa,
        j_max=j_max,
        H=H,
        witness_h=wh,
        witness_x=wx,
        numerical=family.kind == "composed-affine",
        kappa_next=kappa2,
        witness_h_next=wh2,
        unstable=kappa != kappa2,
    )


def polynomial_pairing(family: CurveFamily, h) -> list:
    """Coefficients [a_0, a_1, ..., a_deg] of t -> <h, phi(t)> for a polynomial family."""
    if family.kind != "polynomial":
        raise TypeError("pairing polynomial needs a polynomial family")
    series = pairing_series(family, (), h, 0)
    deg = max((k for k, _ in series.terms), default=0)
    out = [Fraction(0)] * (deg + 1)
    # recombine from the raw terms so Real coefficients stay symbolic
    for i, row in enumerate(family.terms):
        for term in row:
            if h[i] == 0:
                continue
            c = term.coef
            scaled = Fraction(c) * h[i] if is_exact(c) else Real(f"({coef_str(c)})*({h[i]})")
            cur = out[term.degree]
            out[term.degree] = scaled if cur == 0 else _add_coef(cur, scaled)
    return out


# ----------------------------------------------------------------- built-ins


def circle() -> CurveFamily:
    """(sin 2 pi t, cos 2 pi t); rotations act as t -> t + omega."""
    return CurveFamily(
        "trig-polynomial",
        d=2,
        terms=((TrigTerm("sin", Fraction(1), Fraction(1)),), (TrigTerm("cos", Fraction(1), Fraction(1)),)),
        name="circle",
    )


def rotated_circle() -> CurveFamily:
    fam = circle()
    object.__setattr__(fam, "name", "rotated-circle")
    return fam


def default_psi(x):
    """An analytic GL_2-valued map on [0, 1] (determinant stays >= 2)."""
    return ((2 + x, x / 2), (-x / 3, 1 + x))


def ellipse(psi: Callable = default_psi) -> CurveFamily:
    """(cos 2 pi t, sin 2 pi t) . psi(x) for an analytic matrix map psi."""

    def fn(x, t):
        c, s = jets.cospi(2 * t), jets.sinpi(2 * t)
        M = psi(x[0])
        return [c * M[0][0] + s * M[1][0], c * M[0][1] + s * M[1][1]]

    return CurveFamily("composed-affine", d=2, m=1, fn=fn, name="ellipse", closed=True)


def line(alpha="sqrt(2)") -> CurveFamily:
    """gamma_1(t) = (t, alpha t)."""
    a = as_coef(alpha)
    return CurveFamily("polynomial", d=2, terms=(((1, Fraction(1)),), ((1, a),)), name=f"line:{coef_str(a)}")


def line_sine(alpha="sqrt(2)") -> CurveFamily:
    """gamma_2(t) = (sin(pi t / 2), alpha sin(pi t / 2))."""
    a = as_coef(alpha)

    def fn(x, t):
        s = jets.sinpi(t / 2)
        return [s, s * _coef_value(a, t)]

    return CurveFamily("composed-affine", d=2, fn=fn, name=f"line-sine:{coef_str(a)}", closed=False)


def _coef_value(c, like):
    """Coefficient at a precision compatible with ``like`` (mpf, jet or float)."""
    probe = like.c[0] if isinstance(like, jets.Jet) else like
    if isinstance(probe, mpmath.mpf):
        return to_mpf(c, mp.prec)
    return float(c)


def monomial(kappa: int) -> CurveFamily:
    """gamma(t) = (t^kappa, t^(kappa+1)), RND of order kappa."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    return CurveFamily(
        "polynomial", d=2, terms=(((kappa, Fraction(1)),), ((kappa + 1, Fraction(1)),)), name=f"monomial:{kappa}"
    )


def identity() -> CurveFamily:
    """phi(t) = t in d = 1."""
    return CurveFamily("polynomial", d=1, terms=(((1, Fraction(1)),),), name="identity")


def witness_curve(coeffs: Sequence) -> CurveFamily:
    """(a_k t^k + ... + a_1 t, t^(k+1)) whose pairing with h = (1, 0) is the given polynomial."""
    coeffs = [as_coef(c) for c in coeffs]
    k = len(coeffs)
    first = tuple((k - i, c) for i, c in enumerate(coeffs))
    return CurveFamily(
        "polynomial",
        d=2,
        terms=(first, ((k + 1, Fraction(1)),)),
        name="witness:" + ",".join(coef_str(c) for c in coeffs),
    )


def get_family(spec: str) -> CurveFamily:
    """Resolve a family name such as ``circle``, ``monomial:2``, ``line:sqrt(2)`` or ``file:path``."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "circle":
        return circle()
    if name == "rotated-circle":
        return rotated_circle()
    if name == "ellipse":
        return ellipse()
    if name == "identity":
        return identity()
    if name == "monomial":
        return monomial(int(arg or 2))
    if name == "line":
        return line(arg or "sqrt(2)")
    if name == "line-sine":
        return line_sine(arg or "sqrt(2)")
    if name == "witness":
        return witness_curve([s for s in arg.split(",") if s.strip()])
    if name == "file":
        with open(arg) as fh:
            return load_family(fh.read())
    raise ValueError(f"unknown family {spec!r}")


# -------------------------------------------------------------- text config


def _parse_rows(block: str):
    rows = []
    for line_ in block.strip().splitlines():
        line_ = line_.split("#", 1)[0].strip()
        if line_:
            rows.append([c.strip() for c in line_.split(",")])
    return rows


def _coef_from(num: str, den: str):
    den_f = Fraction(den)
    try:
        return Fraction(num) / den_f
    except ValueError:
        return Real(f"({num})/({den_f})") if den_f != 1 else Real(num)


def load_family(text: str) -> CurveFamily:
    """Read a family from ``key = value`` sections.

    ``[family]`` holds kind, d and m.  Polynomial coefficients live in
    ``[coefficients] rows = coord, degree, numerator, denominator`` lines;
    trig families use the same row format in ``[cos]`` and ``[sin]`` sections,
    with the second column a (possibly fractional) frequency.  A numerator may
    be an expression such as ``sqrt(2)``.
    """
    cp = configparser.ConfigParser()
    cp.read_string(text)
    head = cp["family"]
    kind = head.get("kind", "polynomial").strip()
    d = head.getint("d")
    m = head.getint("m", 0)
    name = head.get("name", "file")
    coords: list[list] = [[] for _ in range(d)]
    if kind == "polynomial":
        for c, deg, num, den in _parse_rows(cp.get("coefficients", "rows", fallback="")):
            coords[int(c)].append(PolyTerm(int(deg), _coef_from(num, den)))
    elif kind == "trig-polynomial":
        for basis in ("cos", "sin"):
            for c, f, num, den in _parse_rows(cp.get(basis, "rows", fallback="")):
                coords[int(c)].append(TrigTerm(basis, Fraction(f), _coef_from(num, den)))
    else:
        raise ValueError(f"kind {kind!r} cannot be loaded from text")
    return CurveFamily(kind, d=d, m=m, terms=tuple(tuple(r) for r in coords), name=name)


def _num_den(c):
    if isinstance(c, Fraction):
        return str(c.numerator), str(c.denominator)
    if isinstance(c, float):
        f = Fraction(c)
        return str(f.numerator), str(f.denominator)
    return coef_str(c), "1"


def dump_family(family: CurveFamily) -> str:
    if family.kind == "composed-affine":
        raise ValueError("composed families have no text form")
    lines = ["[family]", f"kind = {family.kind}", f"d = {family.d}", f"m = {family.m}", f"name = {family.name}", ""]
    if family.kind == "polynomial":
        rows = [f"{i}, {t.degree}, {', '.join(_num_den(t.coef))}" for i, row in enumerate(family.terms) for t in row]
        lines += ["[coefficients]", "rows ="] + ["    " + r for r in rows]
    else:
        for basis in ("cos", "sin"):
            rows = [
                f"{i}, {t.freq}, {', '.join(_num_den(t.coef))}"
                for i, row in enumerate(family.terms)
                for t in row
                if t.basis == basis
            ]
            lines += [f"[{basis}]", "rows ="] + ["    " + r for r in rows] + [""]
    return "\n".join(lines) + "\n"
