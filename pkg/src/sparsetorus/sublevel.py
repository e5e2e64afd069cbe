"""Super-level sets {t in [0,1] : |F(x,t)| >= delta} of analytic fields: intervals,
complement measure, the exponent alpha and the gap-cover test."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from . import curvekit
from .tables import write_csv

GRID_DEFAULT = 1024
BISECT_TOL = 1e-12
REFINE = 8
ALPHA_GRID = tuple(0.25 * k for k in range(1, 33))
SIGMA_TOL = 1e-10
CSV_HEADER = ("x", "delta", "component_count", "complement_measure")


class TangencyWarning(UserWarning):
    pass


class AlphaFitError(RuntimeError):
    def __init__(self, message, data):
        super().__init__(message)
        self.data = data


@dataclass(frozen=True)
class Field:
    """F(x, t), vectorised in t; ``N`` is the length of x."""

    fn: Callable
    N: int = 0
    name: str = "field"

    def __call__(self, x, t):
        return np.asarray(self.fn(tuple(x), np.asarray(t, dtype=float)), dtype=float) * np.ones_like(t, dtype=float)


def pairing_field(family, h, j: int = 0) -> Field:
    """F(x, t) = <h, d^j/dt^j phi(x, t)>."""
    hv = np.array(h, dtype=float)

    def fn(x, t):
        return curvekit.derivative_many(family, x, np.atleast_1d(t), j) @ hv

    return Field(fn, family.m, f"<{tuple(h)}, {family.name}^({j})>")


@dataclass(frozen=True)
class SublevelProfile:
    delta: float
    intervals: tuple  # ((a, b), ...) closed, disjoint, ordered
    total_measure: float
    complement_measure: float
    component_count: int
    tangency: bool = False

    def contains(self, t: float, tol: float = 0.0) -> bool:
        return any(a - tol <= t <= b + tol for a, b in self.intervals)


def _crossings(g, ts, vals, xtol):
    roots, cells = [], []
    pos = vals >= 0
    for i in np.nonzero(pos[1:] != pos[:-1])[0]:
        a, b = ts[i], ts[i + 1]
        # disp=False: near flat crossings brentq may stall at float resolution
        r, _ = brentq(g, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200, full_output=True, disp=False)
        roots.append(r)
        cells.append(i)
    return roots, cells


def _profile_from_roots(g, roots, delta, tangency):
    cuts = [0.0] + sorted(roots) + [1.0]
    pieces = []
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b <= a:
            continue
        if g(0.5 * (a + b)) >= 0:
            if pieces and abs(pieces[-1][1] - a) == 0.0:
                pieces[-1] = (pieces[-1][0], b)
            else:
                pieces.append((a, b))
    total = math.fsum(b - a for a, b in pieces)
    return SublevelProfile(delta, tuple(pieces), total, 1.0 - total, len(pieces), tangency)


def sublevel_intervals(
    F: Field, x, delta: float, grid_size: int = GRID_DEFAULT, bisect_tol: float = BISECT_TOL
) -> SublevelProfile:
    """F_{x,delta} = {t : |F(x,t)| >= delta} as closed intervals."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    if grid_size < 64:
        raise ValueError("grid_size must be >= 64")
    x = tuple(x)

    def g(t):
        return float(abs(F(x, np.array([t]))[0]) - delta)

    xtol = max(bisect_tol * min(1.0, delta), 2.0**-64)
    tangency = False
    size = grid_size
    for attempt in range(2):
        ts = np.linspace(0.0, 1.0, size + 1)
        vals = np.abs(F(x, ts)) - delta
        roots, cells = _crossings(g, ts, vals, xtol)
        close = any(c2 - c1 < 2 for c1, c2 in zip(cells[:-1], cells[1:]))
        if not close:
            break
        if attempt == 0:
            size *= REFINE
        else:
            tangency = True
            warnings.warn(f"possible tangency of |F| = {delta} at x={x}", TangencyWarning, stacklevel=2)
    return _profile_from_roots(g, roots, delta, tangency)


# --------------------------------------------------------------- alpha fit


def zero_locus(F: Field, x_grid, t_points: int = 1025) -> list:
    """Grid points x with sup_t |F(x, t)| below the numerical-zero threshold."""
    ts = np.linspace(0.0, 1.0, t_points)
    return [tuple(x) for x in x_grid if float(np.max(np.abs(F(tuple(x), ts)))) < SIGMA_TOL]


def _dist(x, pts) -> float:
    if not pts:
        return math.inf
    return min(math.dist(x, p) for p in pts)


@dataclass(frozen=True)
class AlphaFit:
    alpha: float
    C: float
    max_component_count: int
    worst_ratio: float
    sigma: tuple
    data: tuple = field(default=(), repr=False)  # (x, eps, delta, complement, count)


def alpha_fit(
    F: Field,
    x_grid,
    eps_grid: Sequence[float],
    alphas: Sequence[float] = ALPHA_GRID,
    grid_size: int = GRID_DEFAULT,
    stability: float = 2.0,
) -> AlphaFit:
    """Smallest alpha for which complement |F_{x, eps^alpha}| <= C eps with one C.

    C is fitted on the larger half of the eps grid; alpha is accepted when the
    smaller half stays within ``stability`` times that C, i.e. the ratio
    complement / eps does not grow as eps shrinks.  Points x within eps of the
    numerically detected zero locus are skipped for that eps.
    """
    eps = sorted((float(e) for e in eps_grid), reverse=True)
    if len(eps) < 6:
        raise ValueError("need at least 6 eps values")
    if any(not (0 < e < 1) for e in eps):
        raise ValueError("eps values must lie in (0, 1)")
    x_grid = [tuple(x) for x in x_grid]
    if not x_grid:
        raise ValueError("empty x_grid")
    sigma = zero_locus(F, x_grid)
    half = len(eps) // 2
    tried = []
    for alpha in alphas:
        data = []
        for e in eps:
            delta = e**alpha
            for x in x_grid:
                if _dist(x, sigma) < e or x in sigma:
                    continue
                with warnings.catch_warnings():
                    # narrow gaps at tiny delta look like tangencies; the profile is still usable
                    warnings.simplefilter("ignore", TangencyWarning)
                    p = sublevel_intervals(F, x, delta, grid_size)
                data.append((x, e, delta, p.complement_measure, p.component_count))
        big = [c / e for x, e, _, c, _ in data if e >= eps[half - 1]]
        small = [c / e for x, e, _, c, _ in data if e < eps[half - 1]]
        if not big or not small:
            raise AlphaFitError("every x was excluded as too close to the zero locus", tuple(data))
        C = max(big)
        worst = max(small)
        ratio = worst / C if C > 0 else (0.0 if worst == 0 else math.inf)
        tried.append((alpha, C, worst))
        if worst <= stability * C or worst == 0.0:
            counts = max(row[4] for row in data)
            return AlphaFit(alpha, max(C, worst), counts, ratio, tuple(sigma), tuple(data))
    raise AlphaFitError("no alpha in the search range gives linear domination", tuple(tried))


# --------------------------------------------------------------- set A


def xi_grid_for(eps: float) -> np.ndarray:
    k = math.ceil(4 / eps)
    return np.linspace(0.0, 1.0, k + 1)


def gap_cover_profile(profile: SublevelProfile, eps: float, xi_grid: Optional[Sequence[float]] = None) -> bool:
    """True iff every window (xi - eps/2, xi + eps/2) meets one of the intervals."""
    xi = xi_grid_for(eps) if xi_grid is None else np.asarray(xi_grid, dtype=float)
    if xi_grid is not None and len(xi) > 1 and np.max(np.diff(np.sort(xi))) > eps / 4 + 1e-15:
        raise ValueError("xi grid step must be <= eps/4")
    if not profile.intervals:
        return False
    a = np.array([iv[0] for iv in profile.intervals])
    b = np.array([iv[1] for iv in profile.intervals])
    lo, hi = xi - eps / 2, xi + eps / 2
    hit = (a[None, :] < hi[:, None]) & (b[None, :] > lo[:, None])
    return bool(np.all(hit.any(axis=1)))


def gap_cover_check(
    F: Field, x, eps: float, delta: float, xi_grid: Optional[Sequence[float]] = None, grid_size: int = GRID_DEFAULT
) -> bool:
    """Membership of (eps, delta) in the set A at a single x."""
    return gap_cover_profile(sublevel_intervals(F, x, delta, grid_size), eps, xi_grid)


def lemma_22_check(profile: SublevelProfile, eps: float, M: int) -> bool:
    """complement measure <= eps (M + 1)."""
    return profile.complement_measure <= eps * (M + 1) + 1e-12


def profile_rows(x, profiles: Sequence[SublevelProfile]):
    return [(tuple(x), p.delta, p.component_count, p.complement_measure) for p in profiles]


def write_profile_csv(path, rows):
    write_csv(path, CSV_HEADER, rows)
