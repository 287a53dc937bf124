from gmpy2 import mpq
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from cellparam.algebra.factor import parse_infix
from cellparam.cad import UNIT
from cellparam.jets.diff import diff, diff_multi, neg_quotient
from cellparam.jets.expr import RootOf, const, from_poly, var
from cellparam.jets.floats import eval_float
from cellparam.jets.interval import Interval
from cellparam.jets.jet import jet_eval

x1, x2 = var(1), var(2)
X1, X2 = sympy.symbols("x1 x2")


def _value(e, pt):
    return jet_eval(e, [Interval(v) for v in pt], 0)[(0,) * len(pt)]


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=6, max_size=6), st.integers(0, 2), st.integers(0, 2))
def test_polynomial_derivatives_match_sympy(cs, i, j):
    monos = [(0, 0), (1, 0), (0, 1), (2, 1), (1, 2), (3, 0)]
    text = " + ".join(f"({c})*x1**{a}*x2**{b}" for c, (a, b) in zip(cs, monos))
    e = from_poly(parse_infix(text, ["x1", "x2"]))
    d = diff_multi(e, (i, j))
    want = sympy.diff(sympy.sympify(text), X1, i, X2, j)
    pt = (mpq(1, 3), mpq(2, 5))
    got = _value(d, pt)
    exact = sympy.Rational(want.subs({X1: sympy.Rational(1, 3), X2: sympy.Rational(2, 5)}))
    assert got.lo <= mpq(int(exact.p), int(exact.q)) <= got.hi


def test_branch_derivative_matches_closed_form():
    # y = x2 * sqrt(x1): d/dx1 = x2 / (2 sqrt(x1)), d2/dx1dx2 = 1 / (2 sqrt(x1))
    s = RootOf(parse_infix("y^2 - x", ["x", "y"]), (x1,), 0, UNIT, 1)
    F = x2 * s
    for alpha, fn in [((1, 0), lambda a, b: b / (2 * a ** 0.5)), ((1, 1), lambda a, b: 1 / (2 * a ** 0.5)),
                      ((2, 0), lambda a, b: -b / (4 * a ** 1.5))]:
        d = diff_multi(F, alpha)
        for a, b in [(0.3, 0.7), (0.81, 0.2)]:
            assert eval_float(d, [a, b]) == pytest.approx(fn(a, b), rel=1e-9)


def test_neg_quotient_constant_denominator():
    e = neg_quotient(x1, const(2))
    assert eval_float(e, [0.5]) == pytest.approx(-0.25)
    assert neg_quotient(const(0), x1) == const(0)


def test_diff_of_var():
    assert diff(x1, 1) == const(1) and diff(x1, 2) == const(0)
