"""Fourth moment of rotated Weyl sums over omega and the parallelogram geometry
of the degenerate index tuples."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.special import j0 as bessel_j0

from . import curvekit
from .curvekit import CurveFamily
from .phase import Dilation
from .tables import write_csv

MIN_NODES = 4096
NODE_BUDGET = 1 << 24
HARMONIC_TOL = 1e-12
FOURIER_TOL = 1e-8
CSV_HEADER = ("n", "tau", "estimate", "slope")


class BudgetError(RuntimeError):
    def __init__(self, message, required):
        super().__init__(message)
        self.required = required


class DegenerateFamilyError(ValueError):
    pass


def _require_closed(family: CurveFamily):
    if not family.closed:
        raise ValueError("rotations need a closed (1-periodic) family")


def f_alternating(family: CurveFamily, x, n: int, k: Sequence[int], omega: float, h) -> float:
    """<h, sum_i (-1)^(i+1) phi(x, k_i/n + omega)> for a 4-tuple k in [n]^4."""
    _require_closed(family)
    if len(k) != 4 or any(not (1 <= ki <= n) for ki in k):
        raise ValueError("k must be 4 indices in 1..n")
    ts = np.array([ki / n + omega for ki in k])
    vals = curvekit.eval_many(family, x, ts) @ np.array(h, dtype=float)
    return float(vals[0] - vals[1] + vals[2] - vals[3])


@dataclass(frozen=True)
class MomentReport:
    n: int
    rho_bits: int
    h: tuple
    estimate: float
    node_count: int
    quadrature_error_estimate: float
    method: str  # "quadrature" or "expansion"
    imag_residue: float = 0.0


def derivative_sup(family: CurveFamily, x, samples: int = 1025) -> float:
    """Grid estimate of max_i sup_t |d/dt phi_i(x, t)|, padded by 10 %."""
    ts = np.linspace(0.0, 1.0, samples)
    return 1.1 * float(np.max(np.abs(curvekit.derivative_many(family, x, ts, 1))))


def required_nodes(family: CurveFamily, x, rho: Dilation, h) -> int:
    L = derivative_sup(family, x)
    h1 = sum(abs(int(v)) for v in h)
    return max(MIN_NODES, 8 * math.ceil(float(rho) * h1 * L))


def _pairing_on(family, x, h, ts):
    return curvekit.eval_many(family, x, ts) @ np.array(h, dtype=float)


def _S_values(family, x, rho: float, n: int, h, omegas: np.ndarray) -> np.ndarray:
    k = np.arange(1, n + 1) / n
    ts = (omegas[:, None] + k[None, :]).ravel()
    g = _pairing_on(family, x, h, ts).reshape(len(omegas), n)
    theta = rho * g
    theta -= np.floor(theta)
    return np.exp(2j * np.pi * theta).mean(axis=1)


def _quadrature(family, x, rho: Dilation, n, h, nodes):
    # S(omega + 1/n) = S(omega), so nodes only cover [0, 1/n)
    sub = math.ceil(nodes / n)
    r = float(rho)

    def integral(m):
        om = np.arange(m) / (m * n)
        S = _S_values(family, x, r, n, h, om)
        z = S * S * np.conj(S) * np.conj(S)
        return z.mean()

    coarse = integral(sub)
    fine = integral(2 * sub)
    return fine, abs(fine - coarse), 2 * sub * n


def first_harmonic(family: CurveFamily, x, h, samples: int = 64):
    """(R, offset) if <h, phi(x, t)> = R cos(2 pi t - theta) + c exactly, else None."""
    ts = np.arange(samples) / samples
    g = _pairing_on(family, x, h, ts)
    c = np.fft.rfft(g) / samples
    scale = float(np.max(np.abs(c))) or 1.0
    if np.any(np.abs(c[2:]) > HARMONIC_TOL * scale):
        return None
    return 2 * abs(c[1]), float(c[0].real)


def _expansion(n: int, rho: float, R: float):
    """(1/n^4) sum_k J0(2 pi rho R |D_k|), D_k = e(k1/n) - e(k2/n) + e(k3/n) - e(k4/n)."""
    z = np.exp(2j * np.pi * np.arange(1, n + 1) / n)
    u = (z[:, None] + z[None, :]).ravel()  # index k1 * n + k3 (and k2 * n + k4)
    a, b = np.divmod(np.arange(n * n), n)
    total = 0.0
    for rows in np.array_split(np.arange(n * n), max(1, n * n // 512)):
        D = np.abs(u[rows, None] - u[None, :])
        # D vanishes exactly when {k1, k3} = {k2, k4} or both pairs are antipodal;
        # roundoff leaves ~1e-16 there, which rho would amplify
        k1, k3 = a[rows, None], b[rows, None]
        zero = ((k1 == a) & (k3 == b)) | ((k1 == b) & (k3 == a))
        if n % 2 == 0:
            zero |= ((k3 - k1) % n == n // 2) & ((b - a) % n == n // 2)
        D[zero] = 0.0
        total += float(bessel_j0(2 * np.pi * rho * R * D).sum())
    return total / n**4


def fourth_moment(
    family: CurveFamily, x, rho: Dilation, n: int, h, node_budget: int = NODE_BUDGET, method: str = "auto"
) -> MomentReport:
    """integral over omega in [0,1) of |S_n(x, rho, omega)|^4.

    ``quadrature`` uses the periodic trapezoid rule with at least
    max(4096, 8 ceil(rho ||h||_1 L)) nodes and a node-doubling error estimate.
    ``expansion`` sums the exact Bessel form of the k-expansion, available when
    <h, phi(x, .)> is a pure first harmonic.  ``auto`` prefers the quadrature
    when the budget admits it.
    """
    _require_closed(family)
    if method not in ("auto", "quadrature", "expansion"):
        raise ValueError(f"unknown method {method!r}")
    h = tuple(int(v) for v in h)
    if not any(h):
        raise ValueError("h must be non-zero")
    if n < 1:
        raise ValueError("n must be >= 1")
    bits = rho.magnitude_bits
    if n == 1 or rho.is_zero:
        return MomentReport(n, bits, h, 1.0, MIN_NODES, 0.0, "trivial")
    need = required_nodes(family, x, rho, h)
    fits = 2 * n * math.ceil(need / n) <= node_budget
    if method == "quadrature" or (method == "auto" and fits):
        if not fits:
            raise BudgetError(f"quadrature needs {2 * need} nodes, budget is {node_budget}", 2 * need)
        if rho.magnitude_bits > 40:
            raise BudgetError("double-precision phases are too coarse for this rho", 2 * need)
        val, err, used = _quadrature(family, x, rho, n, h, need)
        # phase rounding: rho * |<h, phi>| * 2^-52 per term
        err += float(rho) * sum(abs(v) for v in h) * 2.0**-50
        return MomentReport(n, bits, h, float(val.real), used, err, "quadrature", abs(float(val.imag)))
    fh = first_harmonic(family, x, h)
    if fh is None:
        raise BudgetError(
            f"quadrature needs {2 * need} nodes (budget {node_budget}) and the pairing is not a single harmonic",
            2 * need,
        )
    R, _ = fh
    val = _expansion(n, float(rho), R)
    # J0 terms carry relative phase error ~ rho * 2^-52
    err = float(rho) * R * 2.0**-50
    return MomentReport(n, bits, h, val, n**4, err, "expansion")


def moment_rows(reports: Sequence[MomentReport], tau: float):
    ns = [r.n for r in reports]
    vals = [r.estimate for r in reports]
    slope = float(np.polyfit(np.log(ns), np.log(vals), 1)[0]) if len(reports) > 1 else ""
    return [(r.n, tau, r.estimate, slope) for r in reports]


def write_moment_csv(path, rows):
    write_csv(path, CSV_HEADER, rows)


# ------------------------------------------------------------ Fourier j0


def j0_fourier(family: CurveFamily, x, h, J_search: int = 8) -> int:
    """Smallest j >= 1 with a non-negligible Fourier coefficient of d^2/dw^2 <h, phi(x, w)>."""
    _require_closed(family)
    if J_search < 1:
        raise ValueError("J_search must be >= 1")
    K = 4 * J_search
    om = np.arange(K) / K
    psi = curvekit.derivative_many(family, x, om, 2) @ np.array(h, dtype=float)
    norm = math.sqrt(float(np.mean(psi**2)))
    c = np.fft.fft(psi) / K
    for j in range(1, J_search + 1):
        if abs(c[j]) > FOURIER_TOL * norm and norm > 0:
            return j
    raise DegenerateFamilyError(f"psi has no non-zero Fourier coefficient up to {J_search}")


# ----------------------------------------------------- parallelogram counts


@dataclass(frozen=True)
class SingularGeometry:
    n: int
    j0: int
    radius: Fraction
    translates: tuple  # (plane, l) with plane in {1, 2} and l = (l1+l2, 0, l2-l1, 0)
    count_near: int


def translates(j0: int) -> list:
    out = set()
    for l1 in range(-2 * j0, 2 * j0 + 1):
        for l2 in range(-2 * j0, 2 * j0 + 1):
            l = (l1 + l2, 0, l2 - l1, 0)
            if max(abs(v) for v in l) <= j0:
                out.add(l)
    return sorted(out)


def _pair_dist4(Ya, Yb, v, top):
    """4 * min_{a in [0, top]} (Ya - v - a)^2 + (Yb - a)^2, integer-valued arrays."""
    A = Ya[:, None] - v
    B = Yb[None, :]
    a = np.clip((A + B) / 2.0, 0, top)
    return np.rint(4 * ((A - a) ** 2 + (B - a) ** 2)).astype(np.int64)


def singular_proximity_count(n: int, j0: int, radius=None) -> SingularGeometry:
    """Exact count of k in [n]^4 with dist(k/n, H) < radius (default 1/n^2).

    H is the union of H_1 = {(a,a,b,b)} and H_2 = {(a,b,b,a)}, a, b in [0,1],
    translated by l/j0.  Distances split into two independent 2-d segment
    distances, computed in integer units of 1/(2 n j0).
    """
    if n < 1 or j0 < 1:
        raise ValueError("need n >= 1 and j0 >= 1")
    r = Fraction(1, n * n) if radius is None else Fraction(radius)
    if r < 0:
        raise ValueError("radius must be non-negative")
    L = 2 * n * j0  # unit 1/L
    Y = (np.arange(1, n + 1) * 2 * j0).astype(np.float64)
    c = 4 * r * r * L * L
    m_max = math.ceil(c) - 1  # 4*D2 (integer) < c
    ls = translates(j0)
    codes = []
    idx = np.arange(n)
    for plane in (1, 2):
        for l in ls:
            v1, v3 = l[0] * 2 * n, l[2] * 2 * n
            if plane == 1:
                # (a + v1, a, b + v3, b): pairs (y1, y2) and (y3, y4)
                P = _pair_dist4(Y, Y, v1, L)
                Q = _pair_dist4(Y, Y, v3, L)
                pa, pb, qa, qb = 0, 1, 2, 3
            else:
                # (a + v1, b, b + v3, a): pairs (y1, y4) and (y3, y2)
                P = _pair_dist4(Y, Y, v1, L)
                Q = _pair_dist4(Y, Y, v3, L)
                pa, pb, qa, qb = 0, 3, 2, 1
            pi, pj = np.nonzero(P <= m_max)
            if len(pi) == 0:
                continue
            qflat = Q.ravel()
            order = np.argsort(qflat, kind="stable")
            qs = qflat[order]
            for a_, b_ in zip(pi.tolist(), pj.tolist()):
                cnt = int(np.searchsorted(qs, m_max - P[a_, b_], side="right"))
                if cnt == 0:
                    continue
                sel = order[:cnt]
                qa_i, qb_i = np.divmod(sel, n)
                k = np.empty((cnt, 4), dtype=np.int64)
                k[:, pa], k[:, pb] = a_, b_
                k[:, qa], k[:, qb] = qa_i, qb_i
                codes.append(((k[:, 0] * n + k[:, 1]) * n + k[:, 2]) * n + k[:, 3])
    total = int(np.unique(np.concatenate(codes)).size) if codes else 0
    desc = tuple((p, l) for p in (1, 2) for l in ls)
    return SingularGeometry(n, j0, r, desc, total)
