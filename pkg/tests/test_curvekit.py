import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sparsetorus import curvekit
from sparsetorus.curvekit import CurveFamily, OrderError, PolyTerm, TrigTerm

SQ2 = math.sqrt(2)


def test_eval_examples():
    assert tuple(curvekit.eval(curvekit.monomial(2), (), 0.0)) == (0.0, 0.0)
    assert curvekit.eval(curvekit.line(), (), 1.0) == pytest.approx([1.0, SQ2], abs=1e-15)
    assert curvekit.eval(curvekit.circle(), (), 0.25) == pytest.approx([1.0, 0.0], abs=1e-15)


def test_derivative_examples():
    mono = curvekit.monomial(2)
    for t in (0.0, 0.4, 0.9):
        assert curvekit.derivative(mono, (), t, 3) == pytest.approx([0.0, 6.0])
        assert curvekit.derivative(mono, (), t, 0) == pytest.approx(curvekit.eval(mono, (), t))
    assert curvekit.derivative(curvekit.circle(), (), 0.0, 2) == pytest.approx([0.0, -4 * math.pi**2], abs=1e-12)


def test_derivative_beyond_jmax():
    with pytest.raises(OrderError):
        curvekit.derivative(curvekit.circle(), (), 0.1, 17)


def test_pairing_series_examples():
    mono = curvekit.monomial(2)
    s3 = curvekit.pairing_series(mono, (), (1, 0), 3)
    assert s3.zero_flag
    s2 = curvekit.pairing_series(mono, (), (1, 0), 2)
    assert not s2.zero_flag and {k: c for k, c in s2.terms if c} == {0: Fraction(2)}
    for h in [(1, 0), (0, 1), (3, -2)]:
        assert curvekit.pairing_series(curvekit.line(), (), h, 2).zero_flag


def test_rnd_order_examples():
    assert curvekit.rnd_order(curvekit.line()).kappa == 1
    rep = curvekit.rnd_order(curvekit.monomial(2))
    assert rep.kappa == 2 and rep.witness_h == (1, 0)
    circ = curvekit.rnd_order(curvekit.circle())
    assert circ.at_least and circ.label == ">= 16"


def test_ellipse_and_line_sine_are_infinite_order():
    assert curvekit.rnd_order(curvekit.ellipse(), H=2).at_least
    rep = curvekit.rnd_order(curvekit.line_sine(), H=2)
    assert rep.at_least and rep.numerical


def test_polynomial_derivative_above_degree_is_zero():
    fam = curvekit.witness_curve(["3/2", "-1", "5"])
    for j in range(fam.degree() + 1, fam.degree() + 4):
        d = curvekit.derivative_mp(fam, (), Fraction(1, 3), j)
        assert all(v == 0 for v in d)


hs = st.tuples(st.integers(-4, 4), st.integers(-4, 4))


@given(hs, hs, st.integers(0, 5))
def test_pairing_linearity_exact(h1, h2, j):
    fam = curvekit.witness_curve(["2/3", "-5", "7/2"])
    if not any(h1) or not any(h2) or not any(a + b for a, b in zip(h1, h2)):
        return
    s = dict(curvekit.pairing_series(fam, (), tuple(a + b for a, b in zip(h1, h2)), j).terms)
    a = dict(curvekit.pairing_series(fam, (), h1, j).terms)
    b = dict(curvekit.pairing_series(fam, (), h2, j).terms)
    for k in set(s) | set(a) | set(b):
        assert s.get(k, 0) == a.get(k, 0) + b.get(k, 0)


@given(hs, hs, st.integers(0, 4))
def test_trig_pairing_linearity_exact(h1, h2, j):
    fam = curvekit.circle()
    hsum = tuple(a + b for a, b in zip(h1, h2))
    if not any(h1) or not any(h2) or not any(hsum):
        return
    s = {f: (a, b) for f, a, b in curvekit.pairing_series(fam, (), hsum, j).terms}
    p = {f: (a, b) for f, a, b in curvekit.pairing_series(fam, (), h1, j).terms}
    q = {f: (a, b) for f, a, b in curvekit.pairing_series(fam, (), h2, j).terms}
    for f in s:
        assert s[f][0] == p[f][0] + q[f][0] and s[f][1] == p[f][1] + q[f][1]


def test_rnd_order_monotone_in_H_and_grid():
    fams = [curvekit.monomial(3), curvekit.witness_curve(["sqrt(2)", "sqrt(3)"]), curvekit.line("1/2")]
    for fam in fams:
        ks = [curvekit.rnd_order(fam, H).kappa for H in (1, 2, 3, 4)]
        assert all(b <= a for a, b in zip(ks, ks[1:]))
    # (t, x t): order 1 at irrational x, degenerate already at j = 0 for x = 1/2
    fn = lambda x, t: [t, x[0] * t]
    fam = CurveFamily("composed-affine", d=2, m=1, fn=fn, name="xline")
    small = curvekit.rnd_order(fam, 2, j_max=4, x_grid=[(0.3 * math.sqrt(2),)]).kappa
    big = curvekit.rnd_order(fam, 2, j_max=4, x_grid=[(0.3 * math.sqrt(2),), (0.5,)]).kappa
    assert (small, big) == (1, 0)


@given(st.floats(0.0, 1.0), st.floats(0.05, 0.95), st.integers(1, 4))
def test_composed_derivatives_match_finite_differences(x, t, j):
    fam = curvekit.ellipse()
    d = curvekit.derivative(fam, (x,), t, j)
    # central differences of order j on eval, step tuned per order
    hstep = {1: 1e-5, 2: 1e-4, 3: 1e-3, 4: 5e-3}[j]
    coeffs = {1: [-0.5, 0, 0.5], 2: [1, -2, 1], 3: [-0.5, 1, 0, -1, 0.5], 4: [1, -4, 6, -4, 1]}[j]
    k = (len(coeffs) - 1) // 2
    pts = [curvekit.eval_mp(fam, (x,), t + (i - k) * hstep, 80) for i in range(len(coeffs))]
    fd = [sum(c * float(p[i]) for c, p in zip(coeffs, pts)) / hstep**j for i in range(2)]
    # richardson-free check: relative error against the scale of the derivative
    scale = max(abs(v) for v in d)
    tol = {1: 1e-6, 2: 1e-6, 3: 1e-4, 4: 1e-3}[j]
    assert np.max(np.abs(np.array(fd) - d)) <= tol * scale


def test_family_file_round_trip(tmp_path):
    fam = CurveFamily(
        "trig-polynomial",
        d=2,
        terms=((TrigTerm("sin", Fraction(1), Fraction(1)), TrigTerm("cos", Fraction(3), Real2())), (TrigTerm("cos", Fraction(1, 2), Fraction(2)),)),
    )
    text = curvekit.dump_family(fam)
    back = curvekit.load_family(text)
    assert not back.closed
    for t in (0.1, 0.7):
        assert curvekit.eval(back, (), t) == pytest.approx(curvekit.eval(fam, (), t), abs=1e-14)
    p = tmp_path / "fam.ini"
    p.write_text(curvekit.dump_family(curvekit.witness_curve(["sqrt(2)", "1/3"])))
    fam2 = curvekit.get_family(f"file:{p}")
    assert curvekit.eval(fam2, (), 0.5) == pytest.approx([SQ2 / 4 + 1 / 6, 0.125])


def Real2():
    from sparsetorus.constants import Real

    return Real("sqrt(2)")


def test_bad_family_inputs():
    with pytest.raises(ValueError):
        CurveFamily("spline", d=1)
    with pytest.raises(ValueError):
        CurveFamily("polynomial", d=2, terms=(((1, 1),),))
    with pytest.raises(ValueError):
        curvekit.get_family("torus-knot")
