"""Simultaneous Diophantine approximation and the bad-dilation constructions."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import mpmath
import numpy as np
from mpmath import mp

from . import curvekit
from .constants import Real, as_coef, coef_str, is_exact, to_mpf
from .curvekit import CurveFamily
from .equidist import SampleCloud, weyl_sum
from .phase import Dilation

SCAN_CAP = 2**32
GENERIC_CAP = 20
MIN_PREC = 128
CHUNK_MAX = 1 << 20


class ScanBudgetError(RuntimeError):
    """The Dirichlet scan hit its cap before meeting the bound."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


@dataclass(frozen=True)
class DirichletSolution:
    q: int
    p: tuple
    err: float
    bound_met: bool
    scanned: int
    M: int
    signed: tuple = ()  # q x_i - p_i

    @property
    def N(self) -> int:
        return len(self.p)


def scan_precision(M: int) -> int:
    return MIN_PREC + int(M).bit_length()


def _as_mp_vector(x, prec):
    out = []
    for v in x:
        if isinstance(v, mpmath.mpf):
            out.append(v)
        else:
            out.append(to_mpf(as_coef(v), prec))
    return out


def _confirm(xm, q: int, M: int, prec: int, xq=None):
    """Check ||q x - p||_inf <= M^(-1/N) at ``prec`` bits, or exactly for rational x."""
    N = len(xm)
    if xq is not None:
        p = tuple(round(q * v) for v in xq)
        signed = [q * v - pi for v, pi in zip(xq, p)]
        err = max(abs(v) for v in signed)
        return p, err, err**N * M <= 1, signed
    with mp.workprec(prec):
        signed = [q * v - mpmath.nint(q * v) for v in xm]
        p = tuple(int(mpmath.nint(q * v)) for v in xm)
        err = max(abs(s) for s in signed)
        met = err**N * M <= 1
    return p, err, bool(met), signed


def dirichlet(x: Sequence, M: int, scan_cap: int = SCAN_CAP, prec: Optional[int] = None) -> DirichletSolution:
    """First q in 1..M with ||q x - p||_inf <= M^(-1/N).

    q values are screened in float64 chunks with a rigorous slack for rounding
    and every candidate is confirmed at ``prec`` bits (>= 128), so the returned
    q is the minimal one.  When the scan stops at ``scan_cap`` before M the best
    q seen is returned with ``bound_met`` possibly false.
    """
    M = int(M)
    if M < 1:
        raise ValueError("M must be >= 1")
    N = len(x)
    if N < 1:
        raise ValueError("x must be non-empty")
    prec = scan_precision(M) if prec is None else max(int(prec), MIN_PREC)
    xm = _as_mp_vector(x, prec)
    xq = [Fraction(v) for v in x] if all(is_exact(v) for v in x) else None
    with mp.workprec(prec):
        for v in xm:
            if not mpmath.isfinite(v):
                raise ValueError("non-finite x")
        frac = [v - mpmath.floor(v) for v in xm]
        theta = float(mpmath.mpf(M) ** (-mpmath.mpf(1) / N))
    xf = np.array([float(v) for v in frac])
    limit = min(M, int(scan_cap))
    if limit > 2**52:
        raise ValueError("scan limit beyond exact float range of q")
    start = 1
    chunk = 4096
    best_q, best_e = 1, math.inf
    while start <= limit:
        stop = min(limit, start + chunk - 1)
        q = np.arange(start, stop + 1, dtype=np.float64)
        slack = stop * 2.0**-50 + 2.0**-60
        dist = np.zeros(q.shape)
        for c in xf:
            y = q * c
            np.maximum(dist, np.abs(y - np.rint(y)), out=dist)
        i = int(np.argmin(dist))
        if dist[i] < best_e:
            best_q, best_e = start + i, float(dist[i])
        for k in np.nonzero(dist <= theta + slack)[0]:
            qq = start + int(k)
            p, err, met, signed = _confirm(xm, qq, M, prec, xq)
            if met:
                return DirichletSolution(qq, p, float(err), True, qq, M, tuple(float(s) for s in signed))
        start = stop + 1
        chunk = min(CHUNK_MAX, max(4096, (1 << 22) // N), chunk * 2)
    p, err, met, signed = _confirm(xm, best_q, M, prec, xq)
    return DirichletSolution(best_q, p, float(err), met, limit, M, tuple(float(s) for s in signed))


def convergent_oracle(x, M: int, prec: int = 256) -> int:
    """Smallest continued-fraction denominator q <= M with ||q x|| <= 1/M (N = 1)."""
    with mp.workprec(prec):
        v = _as_mp_vector([x], prec)[0]
        a = v - mpmath.floor(v)
        q_prev, q = 0, 1
        r = a
        while q <= M:
            if abs(q * v - mpmath.nint(q * v)) * M <= 1:
                return q
            if r == 0:
                break
            r = 1 / r
            k = int(mpmath.floor(r))
            r -= k
            q_prev, q = q, k * q + q_prev
    raise ValueError("no convergent meets the bound")


# -------------------------------------------------------------- constructions


@dataclass(frozen=True)
class BadDilation:
    n: int
    rho: Dilation
    rho_tilde: int
    tag: str  # "poly-<kappa>" or "generic-log"
    errors: tuple  # absolute certificate errors
    signed: tuple
    p: tuple
    q_scanned: int
    M: int
    bound_met: bool
    kappa: Optional[int] = None
    d: Optional[int] = None
    coeffs: tuple = ()
    soft_bound_ok: Optional[bool] = None

    @property
    def error_bound(self) -> float:
        if self.kappa is not None:
            return self.n ** (-(self.kappa + 1 / self.kappa))
        return 1 / 3

    def certificate(self) -> dict:
        out = {"n": self.n}
        if self.kappa is not None:
            out["kappa"] = self.kappa
        else:
            out["d"] = self.d
        out.update(
            rho_tilde=str(self.rho_tilde),
            rho=self.rho.describe(),
            q_scanned=self.q_scanned,
            bound_met=self.bound_met,
            errors=list(self.errors),
        )
        return out

    def certificate_json(self) -> str:
        return json.dumps(self.certificate(), sort_keys=True)


def bad_dilation_poly(coeffs: Sequence, kappa: int, n: int, scan_cap: int = SCAN_CAP) -> BadDilation:
    """rho_n = n^kappa q with q from Dirichlet at M = n^(kappa^2 + 1) on (a_kappa, ..., a_1)."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    if len(coeffs) != kappa:
        raise ValueError(f"need the {kappa} coefficients a_kappa..a_1")
    if n < 2:
        raise ValueError("n must be >= 2")
    coeffs = tuple(c if isinstance(c, mpmath.mpf) else as_coef(c) for c in coeffs)
    M = n ** (kappa * kappa + 1)
    sol = dirichlet(coeffs, M, scan_cap)
    if not sol.bound_met:
        raise ScanBudgetError(f"no q <= {sol.scanned} meets the bound at n={n}", sol)
    rho = Dilation.exact(n**kappa * sol.q)
    return BadDilation(
        n=n,
        rho=rho,
        rho_tilde=sol.q,
        tag=f"poly-{kappa}",
        errors=tuple(abs(s) for s in sol.signed),
        signed=sol.signed,
        p=sol.p,
        q_scanned=sol.scanned,
        M=M,
        bound_met=True,
        kappa=kappa,
        coeffs=coeffs,
    )


def delta_values(bad: BadDilation, prec: int = 256) -> list:
    """delta_{n,j} = sum_m n^(kappa-m) j^m (q a_m - p_m), j = 1..n, at ``prec`` bits."""
    if bad.kappa is None:
        raise ValueError("delta values exist for polynomial constructions only")
    k, n, q = bad.kappa, bad.n, bad.rho_tilde
    with mp.workprec(prec):
        # coeffs are a_kappa..a_1, so coefficient index i has degree kappa - i
        e = {k - i: q * to_mpf(c, prec) - p for i, (c, p) in enumerate(zip(bad.coeffs, bad.p))}
        return [mpmath.fsum(mpmath.mpf(n) ** (k - m) * j**m * e[m] for m in e) for j in range(1, n + 1)]


@dataclass(frozen=True)
class NondecayCheck:
    abs_S: float
    passed: bool
    max_delta: float
    delta_bound: float


def verify_nondecay(family: CurveFamily, h, bad: BadDilation, c0: float = 0.5) -> NondecayCheck:
    if bad.kappa is None:
        raise ValueError("verify_nondecay needs a polynomial construction")
    s = abs(weyl_sum(family, (), bad.rho, bad.n, h))
    md = float(max(abs(v) for v in delta_values(bad)))
    return NondecayCheck(s, s >= c0, md, bad.kappa * bad.n ** (-1 / bad.kappa))


def generic_vector(family: CurveFamily, x, n: int, use_log: bool = True, prec: int = 256) -> list:
    """(log n) phi(x, j/n) for j = 1..n, flattened, at ``prec`` bits."""
    out = []
    with mp.workprec(prec):
        scale = mpmath.log(n) if use_log else mpmath.mpf(1)
        for j in range(1, n + 1):
            t = mpmath.mpf(j) / n
            out += [scale * v for v in curvekit.eval_mp(family, x, t, prec)]
    return out


def bad_dilation_generic(
    family: CurveFamily, x, n: int, d: Optional[int] = None, cap: int = GENERIC_CAP, use_log: bool = True, scan_cap: int = SCAN_CAP
) -> BadDilation:
    """rho_n = q log n with q from Dirichlet at M = 3^(dn) on the sample vector."""
    d = family.d if d is None else int(d)
    if d != family.d:
        raise ValueError("d must match the family dimension")
    if n < 2:
        raise ValueError("n must be >= 2")
    if n * d > cap:
        raise ValueError(f"n*d = {n * d} exceeds the cap {cap}")
    M = 3 ** (d * n)
    prec = scan_precision(M) + 64
    vec = generic_vector(family, x, n, use_log, prec)
    sol = dirichlet(vec, M, scan_cap, prec)
    if not sol.bound_met:
        raise ScanBudgetError(f"no q <= {sol.scanned} meets the bound at n={n}", sol)
    rho = Dilation.times_real(sol.q, Real(f"log({n})")) if use_log else Dilation.exact(sol.q)
    soft = None
    if n >= 3:
        soft = float(rho) <= 3.5 ** (d * n)
    return BadDilation(
        n=n,
        rho=rho,
        rho_tilde=sol.q,
        tag="generic-log" if use_log else "generic",
        errors=tuple(abs(s) for s in sol.signed),
        signed=sol.signed,
        p=sol.p,
        q_scanned=sol.scanned,
        M=M,
        bound_met=True,
        d=d,
        soft_bound_ok=soft,
    )


def verify_confinement(cloud: SampleCloud, radius: float) -> bool:
    """Every coordinate within ``radius`` of an integer (circle distance)."""
    if not (0 < radius < 0.5):
        raise ValueError("radius must lie in (0, 1/2)")
    p = cloud.points
    dist = np.minimum(p, 1.0 - p)
    return bool(np.all(dist <= radius))


def poly_witness(family: CurveFamily, H: int = 5):
    """(kappa, h, [a_kappa..a_1]) from the RND report of a polynomial family of finite order."""
    if family.kind != "polynomial":
        raise TypeError("polynomial family required")
    rep = curvekit.rnd_order(family, H)
    if rep.kappa is None:
        raise ValueError("family has no finite RND order in the search box")
    h = rep.witness_h
    coefs = curvekit.polynomial_pairing(family, h)
    coefs = coefs + [Fraction(0)] * (rep.kappa + 1 - len(coefs))
    if any(not (is_exact(c) and c == 0) for c in coefs[rep.kappa + 1 :]):
        raise ValueError("witness pairing has degree above kappa")
    return rep.kappa, h, [coefs[m] for m in range(rep.kappa, 0, -1)]
