import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsetorus import curvekit, dioph, equidist
from sparsetorus.constants import Real
from sparsetorus.equidist import SampleCloud


def cf_first_q(x: Fraction, M: int) -> int:
    """Smallest continued-fraction denominator q with ||q x|| <= 1/M, exact arithmetic."""
    h0, h1, k0, k1 = 0, 1, 1, 0
    r = x
    while True:
        a = math.floor(r)
        h0, h1 = h1, a * h1 + h0
        k0, k1 = k1, a * k1 + k0
        q = k1
        if q > M:
            raise AssertionError("no convergent meets the bound")
        d = q * x - round(q * x)
        if abs(d) * M <= 1:
            return q
        if r == a:
            raise AssertionError("expansion ended")
        r = 1 / (r - a)


def brute_first_q(x, M):
    for q in range(1, M + 1):
        if max(abs(q * v - round(q * v)) for v in x) ** len(x) * M <= 1:
            return q


def test_examples():
    sol = dioph.dirichlet([Fraction(1, 3)], 4)
    assert (sol.q, sol.p, sol.err) == (3, (1,), 0.0)
    # at M = 3 the bound 1/3 is already met by q = 1
    assert dioph.dirichlet([Fraction(1, 3)], 3).q == 1
    s2 = dioph.dirichlet(["sqrt(2)"], 10)
    assert s2.q == 5 and s2.p == (7,)
    assert s2.err == pytest.approx(abs(5 * math.sqrt(2) - 7))


@given(st.lists(st.floats(0, 1, exclude_max=True), min_size=1, max_size=3), st.integers(2, 3000))
def test_bound_met_and_minimal(x, M):
    sol = dioph.dirichlet(x, M)
    assert sol.bound_met and 1 <= sol.q <= M
    assert sol.err ** len(x) * M <= 1 + 1e-12
    if M <= 400:
        assert sol.q == brute_first_q([Fraction(v) for v in x], M)


@given(st.floats(0, 1, exclude_max=True), st.integers(2, 10**5))
def test_continued_fraction_oracle(x, M):
    assert dioph.dirichlet([x], M).q == cf_first_q(Fraction(x), M)


def test_scan_cap():
    sol = dioph.dirichlet(["sqrt(2)", "sqrt(3)", "sqrt(5)"], 10**9, scan_cap=50)
    assert sol.scanned == 50 and not sol.bound_met
    with pytest.raises(dioph.ScanBudgetError):
        dioph.bad_dilation_poly(["sqrt(2)", "sqrt(3)"], 2, 30, scan_cap=10)


def test_integer_coefficients():
    bad = dioph.bad_dilation_poly([3, -2], 2, 12)
    assert bad.rho_tilde == 1 and all(e == 0 for e in bad.errors)
    chk = dioph.verify_nondecay(curvekit.witness_curve([3, -2]), (1, 0), bad)
    assert chk.abs_S == 1.0


def test_monomial_nondecay():
    kappa, h, coeffs = dioph.poly_witness(curvekit.monomial(2))
    assert (kappa, h) == (2, (1, 0))
    bad = dioph.bad_dilation_poly(coeffs, kappa, 15)
    chk = dioph.verify_nondecay(curvekit.monomial(2), h, bad)
    assert chk.abs_S == 1 and chk.max_delta == 0


def test_sqrt_coefficients():
    bad = dioph.bad_dilation_poly(["sqrt(2)", "sqrt(3)"], 2, 10)
    assert bad.rho_tilde <= 10**5 and max(bad.errors) <= 10**-2.5
    bad20 = dioph.bad_dilation_poly(["sqrt(2)", "sqrt(3)"], 2, 20)
    chk = dioph.verify_nondecay(curvekit.witness_curve(["sqrt(2)", "sqrt(3)"]), (1, 0), bad20, 0.5)
    assert chk.passed and chk.max_delta <= 2 * 20**-0.5


@pytest.mark.parametrize("n", [5, 9, 14])
def test_delta_reconstruction(n):
    import mpmath

    coeffs = ["sqrt(2)", "sqrt(3)"]
    bad = dioph.bad_dilation_poly(coeffs, 2, n)
    deltas = dioph.delta_values(bad)
    a2, a1 = (Real(c).mp_value(300) for c in coeffs)
    p2, p1 = bad.p
    with mpmath.workprec(300):
        for j in range(1, n + 1):
            # <h, rho gamma(j/n)> minus the integer n^2... part fixed by the certificate
            val = bad.rho.integer * (a2 * mpmath.mpf(j) ** 2 / n**2 + a1 * mpmath.mpf(j) / n)
            integer = p2 * j**2 + p1 * n * j
            assert abs((val - integer) - deltas[j - 1]) < mpmath.mpf(2) ** -200
            assert abs(deltas[j - 1]) <= 2 * n ** -0.5


def test_generic_hook_rational_samples():
    # phi(t) = t at n = 5 without the log factor: samples j/5, so q = 5 hits exactly
    bad = dioph.bad_dilation_generic(curvekit.identity(), (), 5, use_log=False)
    assert bad.rho_tilde <= 5 and all(e == 0 for e in bad.errors)


def test_generic_circle_n8():
    bad = dioph.bad_dilation_generic(curvekit.circle(), (), 8)
    assert bad.rho_tilde <= 3**16 and len(bad.errors) == 16 and max(bad.errors) <= 1 / 3
    cloud = equidist.sample_measure(curvekit.circle(), (), bad.rho, 8)
    assert dioph.verify_confinement(cloud, 1 / 3)
    assert equidist.box_discrepancy(cloud, 30, periodic=True) >= 1 - (2 / 3) ** 2 - 0.05
    assert '"n": 8' in bad.certificate_json()


def test_confinement_examples():
    rng = np.random.default_rng(11)
    assert not dioph.verify_confinement(SampleCloud(100, 2, rng.random((100, 2)), {}), 1 / 3)
    assert dioph.verify_confinement(SampleCloud(1, 2, np.zeros((1, 2)), {}), 0.01)


def test_generic_cap():
    with pytest.raises(ValueError):
        dioph.bad_dilation_generic(curvekit.circle(), (), 11)
