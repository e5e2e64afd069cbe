import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from sparsetorus import curvekit, moments
from sparsetorus.curvekit import CurveFamily, TrigTerm
from sparsetorus.phase import Dilation

circle = curvekit.circle()


def test_f_alternating_patterns():
    n = 7
    for a, b in [(1, 3), (2, 2), (7, 4)]:
        for om in (0.0, 0.13, 0.71):
            assert moments.f_alternating(circle, (), n, (a, a, b, b), om, (1, 0)) == pytest.approx(0, abs=1e-14)
            assert moments.f_alternating(circle, (), n, (a, b, b, a), om, (1, 0)) == pytest.approx(0, abs=1e-14)
    want = sum((-1) ** i * math.sin(2 * math.pi * k / 4) for i, k in enumerate((1, 2, 3, 4)))
    assert moments.f_alternating(circle, (), 4, (1, 2, 3, 4), 0.0, (1, 0)) == pytest.approx(want, abs=1e-14)


def _vanishing(n):
    out = set()
    for k in itertools.product(range(1, n + 1), repeat=4):
        vals = [moments.f_alternating(circle, (), n, k, om, (1, 0)) for om in (0.05, 0.3, 0.61)]
        if max(abs(v) for v in vals) < 1e-12:
            out.add(k)
    return out


def _patterns(k):
    return (k[0] == k[1] and k[2] == k[3]) or (k[0] == k[3] and k[1] == k[2])


@pytest.mark.parametrize("n", [5, 7])
def test_f_alternating_vanishes_only_on_patterns(n):
    zero = _vanishing(n)
    assert zero == {k for k in itertools.product(range(1, n + 1), repeat=4) if _patterns(k)}


def test_even_n_adds_antipodal_tuples():
    n = 6
    h = n // 2
    anti = {k for k in itertools.product(range(1, n + 1), repeat=4) if (k[2] - k[0]) % n == h and (k[3] - k[1]) % n == h}
    pats = {k for k in itertools.product(range(1, n + 1), repeat=4) if _patterns(k)}
    assert _vanishing(n) == pats | anti


def test_trivial_cases():
    assert moments.fourth_moment(circle, (), Dilation.exact(10**6), 1, (1, 0)).estimate == 1.0
    assert moments.fourth_moment(circle, (), Dilation.exact(0), 9, (1, 0)).estimate == 1.0


def term_by_term(n, rho):
    # (1/n^4) sum_k integral_0^1 e(rho f_k(w)) dw, independent of the package
    total = 0.0
    for k in itertools.product(range(1, n + 1), repeat=4):
        f = lambda w: sum((-1) ** i * math.sin(2 * math.pi * (ki / n + w)) for i, ki in enumerate(k))
        total += quad(lambda w: math.cos(2 * math.pi * rho * f(w)), 0, 1, limit=200, epsabs=1e-13, epsrel=1e-13)[0]
    return total / n**4


@pytest.mark.parametrize("n,rho", [(2, 3), (3, 5), (4, 2)])
def test_quadrature_matches_term_by_term(n, rho):
    rep = moments.fourth_moment(circle, (), Dilation.exact(rho), n, (1, 0), method="quadrature")
    assert rep.node_count >= 4096 and rep.method == "quadrature"
    assert rep.estimate == pytest.approx(term_by_term(n, rho), abs=1e-8)
    assert rep.imag_residue <= 1e-10


@pytest.mark.parametrize("n", [3, 5, 6])
def test_expansion_matches_quadrature(n):
    r = Dilation.exact(n**3)
    a = moments.fourth_moment(circle, (), r, n, (1, 0), method="quadrature")
    b = moments.fourth_moment(circle, (), r, n, (1, 0), method="expansion")
    assert a.estimate == pytest.approx(b.estimate, abs=1e-10)


def test_budget_and_degenerate_errors():
    with pytest.raises(moments.BudgetError):
        moments.fourth_moment(circle, (), Dilation.exact(10**9), 8, (1, 0), method="quadrature")
    two = CurveFamily(
        "trig-polynomial", d=1, terms=((TrigTerm("sin", Fraction(1), Fraction(1)), TrigTerm("sin", Fraction(2), Fraction(1))),)
    )
    with pytest.raises(moments.BudgetError):
        moments.fourth_moment(two, (), Dilation.exact(10**9), 8, (1,))


def test_j0_examples():
    assert moments.j0_fourier(circle, (), (1, 0)) == 1
    third = CurveFamily("trig-polynomial", d=1, terms=((TrigTerm("cos", Fraction(3), Fraction(1)),),))
    assert moments.j0_fourier(third, (), (1,)) == 3
    const = CurveFamily("trig-polynomial", d=1, terms=((TrigTerm("cos", Fraction(0), Fraction(1)),),))
    with pytest.raises(moments.DegenerateFamilyError):
        moments.j0_fourier(const, (), (1,))


def brute_count(n, j0, r):
    # translates l = (l1, 0, l3, 0) with |l1|, |l3| <= j0 and l1 = l3 mod 2
    ls = [(a, c) for a in range(-j0, j0 + 1) for c in range(-j0, j0 + 1) if (a - c) % 2 == 0]

    def seg2(u, v):
        a = min(max((u + v) / 2, Fraction(0)), Fraction(1))
        return (u - a) ** 2 + (v - a) ** 2

    r2 = Fraction(r) ** 2
    count = 0
    for k in itertools.product(range(1, n + 1), repeat=4):
        y = [Fraction(v, n) for v in k]
        hit = False
        for l1, l3 in ls:
            s1, s3 = Fraction(l1, j0), Fraction(l3, j0)
            if seg2(y[0] - s1, y[1]) + seg2(y[2] - s3, y[3]) < r2:
                hit = True
                break
            if seg2(y[0] - s1, y[3]) + seg2(y[2] - s3, y[1]) < r2:
                hit = True
                break
        count += hit
    return count


@pytest.mark.parametrize("n,j0", [(2, 1), (3, 1), (4, 2), (5, 1), (6, 2)])
def test_singular_count_brute_force(n, j0):
    assert moments.singular_proximity_count(n, j0).count_near == brute_count(n, j0, Fraction(1, n * n))


def test_singular_count_n2_j1_sixteen_tuples():
    g = moments.singular_proximity_count(2, 1)
    assert g.count_near == brute_count(2, 1, Fraction(1, 4))
    assert g.count_near <= 16


@given(st.integers(2, 9), st.integers(1, 2), st.fractions(0, 1, max_denominator=40), st.fractions(0, 1, max_denominator=40))
def test_singular_count_monotone_in_radius(n, j0, r1, r2):
    lo, hi = sorted((r1, r2))
    assert moments.singular_proximity_count(n, j0, lo).count_near <= moments.singular_proximity_count(n, j0, hi).count_near


def test_moment_rows_slope():
    reps = [moments.fourth_moment(circle, (), Dilation.exact(n**6), n, (1, 0)) for n in (8, 16)]
    rows = moments.moment_rows(reps, 6)
    assert rows[-1][3] < -1.5


@pytest.mark.parametrize("n", [7, 8])
def test_expansion_large_rho_limit(n):
    # only the exactly vanishing tuples survive: 2n^2 - n patterns, plus n^2 - 2n antipodal ones for even n
    zeros = 2 * n * n - n + (n * n - 2 * n if n % 2 == 0 else 0)
    rep = moments.fourth_moment(circle, (), Dilation.exact(n**12), n, (1, 0), method="expansion")
    assert rep.estimate == pytest.approx(zeros / n**4, abs=2e-3)
