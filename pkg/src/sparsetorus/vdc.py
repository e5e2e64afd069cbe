"""Van der Corput bookkeeping: the j-th derivative bound, the exponent schedule
over lambda = log rho / log n, and a quadratic-phase integral check."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Optional, Sequence, Union

import numpy as np
from scipy.special import roots_legendre

from .tables import write_csv

SWEEP_POINTS = 101
NODE_BUDGET = 10**7
CSV_HEADER = ("lambda", "j", "nu", "eps", "T1", "T2")


class ScheduleViolation(AssertionError):
    def __init__(self, lam, message):
        super().__init__(f"lambda={lam}: {message}")
        self.lam = lam


class BudgetError(RuntimeError):
    pass


def tau(j: int) -> Fraction:
    """tau_j = 1 / (2^j - 2)."""
    if j < 2:
        raise ValueError("tau_j needs j >= 2")
    return Fraction(1, 2**j - 2)


def vdc_bound(j: int, eta: float, sigma: float, interval_len: float, kappa_j: float = 1.0) -> float:
    """kappa_j (sigma^(2^(2-j)) eta^tau_j |I| + eta^(-tau_j) |I|^(1 - 2^(2-j)))."""
    if eta <= 0:
        raise ValueError("eta must be positive")
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    if interval_len < 1:
        raise ValueError("interval length must be >= 1")
    t = float(tau(j))
    p = 2.0 ** (2 - j)
    return kappa_j * (sigma**p * eta**t * interval_len + eta ** (-t) * interval_len ** (1 - p))


# ----------------------------------------------------------------- schedule


@dataclass(frozen=True)
class ExponentSchedule:
    l: int
    delta: float
    eta: float
    lam: float
    j: int
    tau_j: float
    alpha: tuple  # (alpha_2, ..., alpha_l)
    nu: float
    T1: float
    T2: float
    T1_uniform: float
    T2_uniform: float
    nu_uniform: float
    n: Optional[float] = None

    @property
    def eps(self) -> Optional[float]:
        return None if self.n is None else self.n ** (-self.nu)

    @property
    def eps_uniform(self) -> Optional[float]:
        return None if self.n is None else self.n ** (-self.nu_uniform)

    def alpha_of(self, j: int) -> float:
        return self.alpha[j - 2]


def _alpha_tuple(l: int, alpha) -> tuple:
    if isinstance(alpha, (int, float)):
        vals = [float(alpha)] * (l - 1)
    elif isinstance(alpha, Mapping):
        vals = [float(alpha[j]) for j in range(2, l + 1)]
    else:
        vals = [float(a) for a in alpha]
        if len(vals) != l - 1:
            raise ValueError(f"need alpha_2..alpha_{l}, got {len(vals)} values")
    if any(not (a > 0) for a in vals):
        raise ValueError("alpha values must be positive")
    return tuple(vals)


def j_of(l: int, delta: float, eta: float, lam: float) -> int:
    if delta <= lam <= 1:
        return 2
    if l - 1 <= lam <= l - eta:
        return l
    return math.ceil(lam) + 1


def uniform_bounds(l: int, delta: float, eta: float, alpha: tuple):
    taus = [float(tau(i)) for i in range(2, l + 1)]
    a = max(alpha)
    T1u = -0.5 * min(taus) * eta
    T2u = -0.5 * min(t * al for t, al in zip(taus, alpha)) * delta / a
    nuu = 0.5 * min(1 / a, delta / a, eta / (3 * a))
    return T1u, T2u, nuu


def schedule(l: int, delta: float, eta: float, lam: float, alpha, n: Optional[float] = None) -> ExponentSchedule:
    if l < 2:
        raise ValueError("l must be >= 2")
    if not (0 <= delta < 1 and 0 <= eta < 1):
        raise ValueError("delta and eta must lie in [0, 1)")
    if not (delta <= lam <= l - eta):
        raise ValueError(f"lambda={lam} outside [{delta}, {l - eta}]")
    alpha = _alpha_tuple(l, alpha)
    j = j_of(l, delta, eta, lam)
    t = float(tau(j))
    aj = alpha[j - 2]
    p = 2.0 ** (2 - j)
    r = p / t  # = 4 - 2^(3-j)
    gap = j - lam
    nu = 0.5 * min(gap / (aj * (r - 1)), (r - gap) / aj)
    T1 = aj * nu * (p - t) - t * gap
    T2 = t * (aj * nu + gap) - p
    T1u, T2u, nuu = uniform_bounds(l, delta, eta, alpha)
    return ExponentSchedule(l, delta, eta, lam, j, t, alpha, nu, T1, T2, T1u, T2u, nuu, n)


def default_grid(l: int, delta: float, eta: float, points: int = SWEEP_POINTS) -> np.ndarray:
    """Equispaced grid on [delta, l - eta] plus every branch endpoint inside it."""
    lo, hi = delta, l - eta
    grid = np.linspace(lo, hi, points)
    ends = [1.0, float(l - 1)] + [float(k) for k in range(1, l)]
    extra = [e for e in ends if lo <= e <= hi]
    return np.unique(np.concatenate([grid, extra]))


@dataclass(frozen=True)
class SweepReport:
    rows: tuple  # ExponentSchedule per lambda
    max_T1: float
    max_T2: float
    min_nu: float
    T1_uniform: float
    T2_uniform: float
    nu_uniform: float


def schedule_sweep(
    l: int, delta: float, eta: float, alpha, lam_grid: Optional[Sequence[float]] = None, n: Optional[float] = None, tol: float = 1e-12
) -> SweepReport:
    """Check T_i(lambda) <= T_i_uniform < 0 and nu(lambda) >= nu_uniform over the grid."""
    grid = default_grid(l, delta, eta) if lam_grid is None else np.asarray(lam_grid, dtype=float)
    rows = []
    for lam in grid.tolist():
        s = schedule(l, delta, eta, lam, alpha, n)
        if s.j - lam < eta - tol:
            raise ScheduleViolation(lam, f"j - lambda = {s.j - lam} < eta")
        if not s.T1 <= s.T1_uniform + tol:
            raise ScheduleViolation(lam, f"T1={s.T1} exceeds uniform {s.T1_uniform}")
        if not s.T2 <= s.T2_uniform + tol:
            raise ScheduleViolation(lam, f"T2={s.T2} exceeds uniform {s.T2_uniform}")
        if not s.nu >= s.nu_uniform - tol:
            raise ScheduleViolation(lam, f"nu={s.nu} below uniform {s.nu_uniform}")
        if not (s.T1_uniform < 0 and s.T2_uniform < 0):
            raise ScheduleViolation(lam, "uniform bounds are not negative")
        rows.append(s)
    return SweepReport(
        tuple(rows),
        max(s.T1 for s in rows),
        max(s.T2 for s in rows),
        min(s.nu for s in rows),
        rows[0].T1_uniform,
        rows[0].T2_uniform,
        rows[0].nu_uniform,
    )


def sweep_rows(report: SweepReport):
    return [(s.lam, s.j, s.nu, "" if s.eps is None else s.eps, s.T1, s.T2) for s in report.rows]


def write_sweep_csv(path, report: SweepReport):
    write_csv(path, CSV_HEADER, sweep_rows(report))


# ---------------------------------------------------------- test sums


def quadratic_sum(N: int, scale: int = 1) -> complex:
    """sum_{k=1}^N e(k^2 / (2 scale)), with phases reduced in integer arithmetic."""
    k = np.arange(1, N + 1, dtype=np.int64)
    m = 2 * scale
    r = (k % m) ** 2 % m
    return complex(np.exp(2j * np.pi * r / m).sum())


def quadratic_ratio(N: int, scale: int = 1, kappa: float = 1.0) -> float:
    """|sum| / vdc_bound for g(t) = t^2 / (2 scale) on [1, N] (g'' = 1/scale)."""
    bound = vdc_bound(2, 1.0 / scale, 1.0, max(N - 1, 1), kappa)
    return abs(quadratic_sum(N, scale)) / bound


# -------------------------------------------------- oscillatory integral


@dataclass(frozen=True)
class OscillatoryCheck:
    value: complex
    abs_value: float
    bound: float
    holds: bool
    nodes: int


def quad_phase_integral(A: float, B: float = 0.0, C: float = 0.0, interval=(0.0, 1.0), node_budget: int = NODE_BUDGET, order: int = 16):
    """integral of e(A w^2 + B w + C) over the interval by composite Gauss-Legendre."""
    a, b = map(float, interval)
    if not b > a:
        raise ValueError("empty interval")
    f = lambda w: A * w * w + B * w + C
    # total variation of f over [a, b]: split at the vertex when it is inside
    pts = [a, b]
    if A != 0 and a < -B / (2 * A) < b:
        pts.insert(1, -B / (2 * A))
    variation = sum(abs(f(v) - f(u)) for u, v in zip(pts[:-1], pts[1:]))
    need = max(8 * math.ceil(variation), 64)
    panels = math.ceil(need / order)
    nodes = panels * order
    if nodes > node_budget:
        raise BudgetError(f"need {nodes} nodes, budget is {node_budget}")
    x, w = roots_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    ww = mid + half * x[None, :]
    vals = np.exp(2j * np.pi * f(ww)) * (half * w[None, :])
    return complex(vals.sum()), nodes


def oscillatory_integral_check(
    A: float, B: float = 0.0, C: float = 0.0, interval=(0.0, 1.0), c: float = 4.0, node_budget: int = NODE_BUDGET
) -> OscillatoryCheck:
    """Compare |integral e(f)| with c / sqrt(lambda), lambda = |f''| = 2|A|."""
    lam = 2 * abs(A)
    if lam <= 0:
        raise ValueError("need |f''| > 0")
    value, nodes = quad_phase_integral(A, B, C, interval, node_budget)
    bound = c / math.sqrt(lam)
    return OscillatoryCheck(value, abs(value), bound, abs(value) <= bound, nodes)
