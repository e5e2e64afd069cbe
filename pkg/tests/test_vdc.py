import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import fresnel

from sparsetorus import vdc


def test_tau_examples_and_identity():
    assert vdc.tau(2) == Fraction(1, 2) and vdc.tau(3) == Fraction(1, 6)
    for j in range(2, 21):
        assert Fraction(2) ** (2 - j) / vdc.tau(j) == 4 - Fraction(2) ** (3 - j)


def test_vdc_bound_values():
    assert vdc.vdc_bound(2, 1, 1, 1) == 2
    # |I| * sigma^1 * eta^(1/2) + eta^(-1/2) * |I|^0
    assert vdc.vdc_bound(2, 4, 1, 100) == pytest.approx(100 * 2 + 0.5)
    with pytest.raises(ValueError):
        vdc.vdc_bound(2, 0, 1, 1)


def test_j_branches():
    assert vdc.j_of(3, 0.2, 0.2, 0.5) == 2
    assert vdc.j_of(3, 0.2, 0.2, 2.5) == 3
    assert vdc.j_of(4, 0.2, 0.2, 1.5) == 3
    s = vdc.schedule(3, 0.2, 0.2, 1.5, 1.0)
    assert s.T1 < 0 and s.T2 < 0


@given(st.integers(2, 6), st.floats(0.05, 0.45))
def test_schedule_properties(l, eta):
    delta = eta
    grid = vdc.default_grid(l, delta, eta)
    rows = [vdc.schedule(l, delta, eta, lam, 1.0, n=1000.0) for lam in grid]
    js = [r.j for r in rows]
    assert all(b >= a for a, b in zip(js, js[1:]))
    for r in rows:
        assert r.j - r.lam >= eta - 1e-12
        assert r.nu >= r.nu_uniform - 1e-12
        assert r.eps <= r.eps_uniform + 1e-15


def test_sweep_acceptance_grid():
    d = 1 / math.log(1000)
    for l in (2, 3, 4, 5):
        rep = vdc.schedule_sweep(l, d, d, 1.0, n=1000.0)
        assert rep.max_T1 <= rep.T1_uniform < 0
        assert rep.max_T2 <= rep.T2_uniform < 0


def test_uniform_bounds_limits_and_scaling():
    small = vdc.uniform_bounds(3, 1e-9, 1e-9, (1.0, 1.0))
    assert all(-1e-8 < v <= 0 for v in small[:2]) and 0 <= small[2] < 1e-8
    a = (1.0, 2.0, 3.0)
    T2 = vdc.uniform_bounds(4, 0.2, 0.2, a)[1]
    T2s = vdc.uniform_bounds(4, 0.2, 0.2, tuple(10 * v for v in a))[1]
    # T2_uniform = -(1/2) min(tau_j alpha_j) delta / max(alpha) is scale free
    assert T2s == pytest.approx(T2)


def test_quadratic_sum_ratio_bounded():
    ratios = [vdc.quadratic_ratio(2**k, s) for k in range(4, 13) for s in (1, 2**k)]
    assert max(ratios) <= 10


def test_oscillatory_integral_against_fresnel():
    for A in (1.0, 10.0, 100.0, 1000.0):
        chk = vdc.oscillatory_integral_check(A)
        z = 2 * math.sqrt(A)
        S, C = fresnel(z)
        want = complex(C, S) / z
        assert abs(chk.value - want) < 1e-10
    assert vdc.oscillatory_integral_check(100.0).abs_value <= 4 / math.sqrt(200)
    assert abs(vdc.quad_phase_integral(1e-9)[0]) == pytest.approx(1.0, abs=1e-6)


def test_symmetric_phase_halves():
    A = 37.0
    f = lambda a, b: vdc.quad_phase_integral(A, -A, A / 4, (a, b))[0]
    whole = f(0.0, 1.0)
    assert whole.real == pytest.approx(2 * f(0.0, 0.5).real, abs=1e-12)
    assert whole == pytest.approx(f(0.0, 0.5) + f(0.5, 1.0), abs=1e-12)


def test_budget():
    with pytest.raises(vdc.BudgetError):
        vdc.quad_phase_integral(1e9, node_budget=1000)
