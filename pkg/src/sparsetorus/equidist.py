"""Sample clouds pi(rho phi(x, k/n + omega)), Weyl sums, box discrepancy and verdicts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath import mp

from .curvekit import CurveFamily, eval_mp, full_box, half_box
from .phase import (
    Dilation,
    ReducedPhase,
    exact_pairing,
    exact_path_ok,
    reduced_phase,
    unit_character,
    working_precision,
)
from .tables import write_csv

H_DEFAULT = 5
DISC_CELL_CAP = 10**8
SAMPLED_BOXES = 200_000
PERIODIC_DENSE_CAP = 4_000_000
CSV_HEADER = ("n", "rho_bits", "h", "abs_S", "discrepancy")


@dataclass(frozen=True)
class VerdictRule:
    slope_max: float = -0.1
    final_max: float = 0.1
    persistent_min: float = 0.5
    min_reports: int = 3


@dataclass(frozen=True, eq=False)
class SampleCloud:
    n: int
    d: int
    points: np.ndarray
    provenance: dict
    error_bound: float = 0.0
    exact_points: Optional[tuple] = None  # Fractions, when the exact path was used

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.shape != (self.n, self.d):
            raise ValueError(f"points have shape {pts.shape}, expected {(self.n, self.d)}")
        if pts.size and (pts.min() < 0.0 or pts.max() >= 1.0):
            raise ValueError("cloud coordinates must lie in [0, 1)")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class WeylReport:
    n: int
    rho_bits: int
    H: int
    magnitudes: dict  # h -> |S_n(h)|
    max_abs: float
    rho: str = ""

    def argmax(self):
        return max(self.magnitudes, key=self.magnitudes.get)


@dataclass(frozen=True)
class Verdict:
    label: str  # equidistributing | non-equidistributing | inconclusive
    slope: float
    final_max: float
    n_values: tuple


def _t_values(n: int, omega) -> list:
    off = Fraction(0) if omega is None else Fraction(omega)
    return [Fraction(k, n) + off for k in range(1, n + 1)]


def _check_omega(family: CurveFamily, omega):
    if omega is not None:
        if not family.closed:
            raise ValueError("rotations omega are only defined for closed families")
        if not math.isfinite(float(omega)):
            raise ValueError("non-finite omega")


def sample_measure(family: CurveFamily, x, rho: Dilation, n: int, omega=None) -> SampleCloud:
    """The n points frac(rho phi(x, k/n + omega)), k = 1..n."""
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_omega(family, omega)
    ts = _t_values(n, omega)
    prov = {"family": family.name, "x": tuple(float(v) for v in x), "rho": rho.describe(), "omega": omega}
    d = family.d
    if rho.is_zero:
        return SampleCloud(n, d, np.zeros((n, d)), prov, 0.0, tuple(((Fraction(0),) * d) for _ in ts))
    if exact_path_ok(family, rho):
        exact = []
        for t in ts:
            row = []
            for i in range(d):
                e = tuple(int(i == j) for j in range(d))
                v = rho.integer * exact_pairing(family, e, t)
                row.append(v - math.floor(v))
            exact.append(tuple(row))
        pts = np.array([[float(v) for v in row] for row in exact], dtype=float)
        pts[pts >= 1.0] = 0.0
        return SampleCloud(n, d, pts, prov, 2.0**-53, tuple(exact))
    ones = (1,) * d
    prec = working_precision(family, x, ones, rho)
    pts = np.empty((n, d))
    worst = 0.0
    with mp.workprec(prec):
        r = rho.mp_value(prec)
        for k, t in enumerate(ts):
            tm = mpmath.mpf(t.numerator) / t.denominator
            for i, v in enumerate(eval_mp(family, x, tm, prec)):
                y = r * v
                f = float(y - mpmath.floor(y))
                pts[k, i] = 0.0 if f >= 1.0 else f
                worst = max(worst, abs(float(y)))
    err = max(worst, 1.0) * 2.0 ** (6 - prec) + 2.0**-53
    return SampleCloud(n, d, pts, prov, err)


def tree_sum(z: np.ndarray) -> np.ndarray:
    """Pairwise sum along axis 0 with a fixed reduction shape."""
    z = np.asarray(z)
    m = z.shape[0]
    if m == 0:
        return np.zeros(z.shape[1:], dtype=z.dtype)
    size = 1 << (m - 1).bit_length()
    if size != m:
        pad = np.zeros((size - m,) + z.shape[1:], dtype=z.dtype)
        z = np.concatenate([z, pad])
    while z.shape[0] > 1:
        z = z[0::2] + z[1::2]
    return z[0]


def weyl_sum(family: CurveFamily, x, rho: Dilation, n: int, h, omega=None) -> complex:
    """(1/n) sum_k e(rho <h, phi(x, k/n + omega)>) from individually reduced phases."""
    h = tuple(int(v) for v in h)
    if not any(h):
        raise ValueError("h must be non-zero")
    if n < 1:
        raise ValueError("n must be >= 1")
    _check_omega(family, omega)
    vals = np.array([unit_character(reduced_phase(family, x, h, rho, t)) for t in _t_values(n, omega)])
    return _scaled(tree_sum(vals), n)


def cloud_sums(cloud: SampleCloud, hs: Sequence) -> np.ndarray:
    """S_n(h) for each h from the cloud coordinates (error ||h||_1 * cloud error)."""
    hm = np.array(hs, dtype=float).T
    theta = cloud.points @ hm
    theta -= np.floor(theta)
    z = np.exp(2j * np.pi * theta)
    return _scaled(tree_sum(z), cloud.n)


def _scaled(z, n):
    # numpy complex / int goes through complex division and is not correctly rounded
    z = np.asarray(z)
    out = z.real / n + 1j * (z.imag / n)
    return complex(out) if out.ndim == 0 else out


def weyl_report(
    family: CurveFamily, x, rho: Dilation, n: int, H: int = H_DEFAULT, omega=None, cloud: Optional[SampleCloud] = None
) -> WeylReport:
    if H < 1:
        raise ValueError("H must be >= 1")
    if cloud is None:
        cloud = sample_measure(family, x, rho, n, omega)
    hs = half_box(family.d, H)
    mags = np.minimum(np.abs(cloud_sums(cloud, hs)), 1.0)
    out = {}
    for h, v in zip(hs, mags.tolist()):
        out[h] = v
        out[tuple(-c for c in h)] = v  # |S(-h)| = |S(h)|
    ordered = {h: out[h] for h in full_box(family.d, H)}
    return WeylReport(n, rho.magnitude_bits, H, ordered, max(ordered.values()), rho.describe())


# -------------------------------------------------------------- discrepancy


def _cells(cloud: SampleCloud, R: int) -> np.ndarray:
    """Integer cell indices floor(R * p), exact near cell boundaries."""
    idx = np.floor(cloud.points * R).astype(np.int64)
    if cloud.exact_points is not None:
        near = np.abs(cloud.points * R - np.rint(cloud.points * R)) < 1e-6
        for k, i in zip(*np.nonzero(near)):
            idx[k, i] = math.floor(cloud.exact_points[k][i] * R)
    else:
        # points are exact binary rationals; settle rounding of p*R exactly
        near = np.abs(cloud.points * R - np.rint(cloud.points * R)) < 1e-9
        for k, i in zip(*np.nonzero(near)):
            idx[k, i] = math.floor(Fraction(float(cloud.points[k, i])) * R)
    return np.clip(idx, 0, R - 1)


def _hist(idx: np.ndarray, R: int, d: int) -> np.ndarray:
    flat = np.ravel_multi_index(tuple(idx.T), (R,) * d)
    return np.bincount(flat, minlength=R**d).reshape((R,) * d)


def _anchored_dense(idx, R, d, n):
    c = _hist(idx, R, d).astype(np.int64)
    for ax in range(d):
        c = np.cumsum(c, axis=ax)
    # c[i1..id] = #points with cell_j <= i_j, i.e. inside [0,(i+1)/R)
    grid = np.arange(1, R + 1) / R
    vol = np.ones((R,) * d)
    for ax in range(d):
        shape = [1] * d
        shape[ax] = R
        vol = vol * grid.reshape(shape)
    return float(np.max(np.abs(c / n - vol)))


def _anchored_sampled(idx, R, d, n, rng):
    a = rng.integers(1, R + 1, size=(SAMPLED_BOXES, d))
    best = 0.0
    for chunk in np.array_split(a, max(1, SAMPLED_BOXES // 2000)):
        inside = np.all(idx[None, :, :] < chunk[:, None, :], axis=2)
        mass = inside.sum(axis=1) / n
        vol = np.prod(chunk / R, axis=1)
        best = max(best, float(np.max(np.abs(mass - vol))))
    return best


def _anchored_1d_sorted(idx, R, n):
    cells = np.sort(idx[:, 0])
    cand = np.unique(np.concatenate([cells, cells + 1, [1, R]]))
    cand = cand[(cand >= 1) & (cand <= R)]
    counts = np.searchsorted(cells, cand, side="left")  # cells < a*R
    return float(np.max(np.abs(counts / n - cand / R)))


def _periodic_dense(idx, R, d, n):
    """Boxes prod [b_i, b_i + a_i) mod 1 with b, a on the grid, via a doubled prefix table."""
    c = _hist(idx, R, d).astype(np.int64)
    c = np.tile(c, (2,) * d)
    P = np.pad(c, [(1, 0)] * d)
    for ax in range(d):
        P = np.cumsum(P, axis=ax)
    # P[j] = #(doubled) points with cell < j per axis; box [b, b+a) count by inclusion-exclusion
    b = np.arange(R)
    a = np.arange(1, R + 1)
    lo = b[:, None]
    hi = b[:, None] + a[None, :]  # shape (R, R): [b, a]
    if d == 1:
        counts = P[hi] - P[np.broadcast_to(lo, hi.shape)]
        vol = a[None, :] / R
        return float(np.max(np.abs(counts / n - vol)))
    if d == 2:
        L = np.broadcast_to(lo, hi.shape)
        H1, L1 = hi[:, :, None, None], L[:, :, None, None]
        H2, L2 = hi[None, None, :, :], L[None, None, :, :]
        counts = P[H1, H2] - P[L1, H2] - P[H1, L2] + P[L1, L2]
        vol = (a[None, :, None, None] / R) * (a[None, None, None, :] / R)
        return float(np.max(np.abs(counts / n - vol)))
    raise ValueError("dense periodic discrepancy is implemented for d <= 2")


def _periodic_sampled(idx, R, d, n, rng):
    best = 0.0
    for _ in range(max(1, SAMPLED_BOXES // 2000)):
        b = rng.integers(0, R, size=(2000, d))
        a = rng.integers(1, R + 1, size=(2000, d))
        off = (idx[None, :, :] - b[:, None, :]) % R
        inside = np.all(off < a[:, None, :], axis=2)
        mass = inside.sum(axis=1) / n
        vol = np.prod(a / R, axis=1)
        best = max(best, float(np.max(np.abs(mass - vol))))
    return best


def box_discrepancy(
    cloud: SampleCloud, R: int, periodic: bool = False, cell_cap: int = DISC_CELL_CAP, seed: int = 0
) -> float:
    """Maximum |empirical mass - volume| over grid boxes of side multiples of 1/R.

    Anchored boxes are prod [0, a_i).  With ``periodic=True`` the boxes are
    prod [b_i, b_i + a_i) taken mod 1, which also sees clouds confined around
    the origin of the torus.  Grids above ``cell_cap`` cells fall back to a
    sorted sweep (d = 1) or seeded random boxes, which gives a lower bound.
    """
    if R < 2:
        raise ValueError("R must be >= 2")
    n, d = cloud.n, cloud.d
    idx = _cells(cloud, R)
    rng = np.random.default_rng(seed)
    if not periodic:
        if R**d <= cell_cap:
            return _anchored_dense(idx, R, d, n)
        if d == 1:
            return _anchored_1d_sorted(idx, R, n)
        return _anchored_sampled(idx, R, d, n, rng)
    if d <= 2 and R ** (2 * d) <= min(cell_cap, PERIODIC_DENSE_CAP):
        return _periodic_dense(idx, R, d, n)
    return _periodic_sampled(idx, R, d, n, rng)


# ------------------------------------------------------------------ verdict


def decay_slope(ns, values) -> float:
    x = np.log(np.asarray(ns, dtype=float))
    y = np.log(np.maximum(np.asarray(values, dtype=float), 1e-300))
    return float(np.polyfit(x, y, 1)[0])


def equidist_verdict(reports: Sequence[WeylReport], rule: VerdictRule = VerdictRule()) -> Verdict:
    if len(reports) < rule.min_reports:
        raise ValueError(f"need at least {rule.min_reports} reports")
    reports = sorted(reports, key=lambda r: r.n)
    ns = [r.n for r in reports]
    vals = [r.max_abs for r in reports]
    slope = decay_slope(ns, vals)
    if all(v >= rule.persistent_min for v in vals):
        label = "non-equidistributing"
    elif slope <= rule.slope_max and vals[-1] <= rule.final_max:
        label = "equidistributing"
    else:
        label = "inconclusive"
    return Verdict(label, slope, vals[-1], tuple(ns))


def report_rows(report: WeylReport, discrepancy: Optional[float] = None):
    disc = "" if discrepancy is None else discrepancy
    return [(report.n, report.rho_bits, h, v, disc) for h, v in report.magnitudes.items()]


def write_report_csv(path, reports: Sequence[WeylReport], discrepancies: Optional[Sequence] = None):
    rows = []
    for i, r in enumerate(reports):
        rows += report_rows(r, None if discrepancies is None else discrepancies[i])
    write_csv(path, CSV_HEADER, rows)
