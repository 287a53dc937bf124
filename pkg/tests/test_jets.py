import math
import random

import mpmath
import pytest
import sympy as sp
from gmpy2 import mpq

from cellparam.algebra import Poly
from cellparam.algebra.factor import parse_infix
from cellparam.jets.expr import RootOf, const, from_poly, from_text, simplify, substitute, to_poly, to_text, var
from cellparam.jets.floats import eval_float
from cellparam.jets.interval import Interval
from cellparam.jets.jet import GuardViolation, OrderTooLarge, enclose, jet_eval, multi_indices

x1, x2 = var(1), var(2)
mpmath.mp.prec = 200


def branch(text, index=0, window=(0, 2), names=("x", "y"), count=None):
    p = parse_infix(text, list(names))
    return RootOf(p, tuple(var(i + 1) for i in range(len(names) - 1)), index,
                  (mpq(window[0]), mpq(window[1])), count)


def test_multi_index_order():
    assert multi_indices(2, 2) == ((0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0))


def test_sqrt_branch_enclosure_on_quarter_box():
    jet = jet_eval(branch("y**2 - x"), [(mpq(1, 4), 1)], 2)
    assert jet[(0,)] == Interval(mpq(1, 2), 1)
    assert jet[(1,)] == Interval(mpq(1, 2), 1)
    assert jet[(2,)].contains(Interval(mpq(-1), mpq(-1, 8)))


def test_polynomial_jet_is_exact_on_points():
    e = x1 ** 3 * x2 + const(2) * x2
    jet = jet_eval(e, [Interval(mpq(1, 2)), Interval(mpq(1, 3))], 3)
    assert jet[(0, 1)] == Interval(mpq(1, 8) + 2)
    assert jet[(1, 1)] == Interval(mpq(3, 4))
    assert jet[(3, 0)] == Interval(mpq(1, 3))


def _random_poly(rng):
    terms = {}
    for _ in range(rng.randint(1, 6)):
        terms[(rng.randint(0, 4), rng.randint(0, 4))] = mpq(rng.randint(-9, 9), rng.randint(1, 4))
    return Poly(["x1", "x2"], terms)


def test_containment_on_random_polynomials():
    rng = random.Random(7)
    X1, X2 = sp.symbols("x1 x2")
    for _ in range(200):
        p = _random_poly(rng)
        e = from_poly(p)
        a, b = sorted(mpq(rng.randint(0, 64), 64) for _ in range(2))
        c, d = sorted(mpq(rng.randint(0, 64), 64) for _ in range(2))
        jet = jet_eval(e, [Interval(a, b), Interval(c, d)], 3)
        f = sum(sp.Rational(int(v.numerator), int(v.denominator)) * X1**m[0] * X2**m[1]
                for m, v in p.terms.items())
        derivs = {}
        for alpha, _ in jet.items():
            dpoly = sp.Poly(sp.diff(f, X1, alpha[0], X2, alpha[1]), X1, X2)
            scale = math.factorial(alpha[0]) * math.factorial(alpha[1])
            derivs[alpha] = [(mpq(int(cf.p), int(cf.q) * scale), m) for m, cf in dpoly.terms()]
        for _ in range(5):
            pt = (a + (b - a) * mpq(rng.randint(0, 16), 16), c + (d - c) * mpq(rng.randint(0, 16), 16))
            for alpha, enc in jet.items():
                dv = sum((cf * pt[0] ** m[0] * pt[1] ** m[1] for cf, m in derivs[alpha]), mpq(0))
                assert enc.lo <= dv <= enc.hi


def test_refinement_is_monotone():
    rng = random.Random(3)
    for _ in range(30):
        e = from_poly(_random_poly(rng))
        outer = jet_eval(e, [Interval(0, 1), Interval(0, 1)], 2)
        inner = jet_eval(e, [Interval(mpq(1, 4), mpq(1, 2)), Interval(mpq(1, 3), mpq(2, 3))], 2)
        for (alpha, big), (_, small) in zip(outer.items(), inner.items()):
            assert big.contains(small), alpha


def _mp_branch(coeff_fn, index, window):
    """Branch value by high-precision polynomial root finding."""
    def f(xv):
        roots = mpmath.polyroots(coeff_fn(xv)[::-1], maxsteps=200, extraprec=400)
        real = sorted(mpmath.re(z) for z in roots if abs(mpmath.im(z)) < mpmath.mpf(10) ** -40)
        real = [z for z in real if window[0] < z < window[1]]
        return real[index]
    return f


BRANCHES = [
    ("y**2 - x", lambda xv: [-xv, 0, 1], 0, (0, 2), (mpq(1, 10), mpq(9, 10))),
    ("y**3 + y - x", lambda xv: [-xv, 1, 0, 1], 0, (-2, 2), (mpq(-1), mpq(1))),
    ("x**2 + y**2 - 1", lambda xv: [xv**2 - 1, 0, 1], 0, (0, 2), (mpq(-9, 10), mpq(9, 10))),
]


@pytest.mark.parametrize("text,coeffs,index,window,span", BRANCHES)
def test_branch_jets_against_finite_differences(text, coeffs, index, window, span):
    e = branch(text, index, window)
    f = _mp_branch(coeffs, index, window)
    rng = random.Random(11)
    for _ in range(20):
        pt = span[0] + (span[1] - span[0]) * mpq(rng.randint(1, 999), 1000)
        jet = jet_eval(e, [Interval(pt)], 4)
        xv = mpmath.mpf(int(pt.numerator)) / int(pt.denominator)
        for k in range(5):
            d = mpmath.diff(f, xv, k) / math.factorial(k)
            enc = jet[(k,)]
            slack = mpmath.mpf(10) ** -30
            assert mpmath.mpf(int(enc.lo.numerator)) / int(enc.lo.denominator) - slack <= d
            assert d <= mpmath.mpf(int(enc.hi.numerator)) / int(enc.hi.denominator) + slack


def test_branch_jets_on_boxes_contain_point_values():
    e = branch("y**3 + y - x", 0, (-2, 2))
    box_jet = jet_eval(e, [Interval(mpq(1, 5), mpq(3, 5))], 3)
    for k in range(11):
        pt = mpq(1, 5) + mpq(2, 5) * mpq(k, 10)
        pj = jet_eval(e, [Interval(pt)], 3)
        for (alpha, big), (_, small) in zip(box_jet.items(), pj.items()):
            assert big.contains(small), (alpha, pt)


def test_singular_branch_raises_guard_violation():
    e = branch("y**2 - x", 1, (-2, 2), count=2)
    with pytest.raises(GuardViolation):
        jet_eval(e, [Interval(0, mpq(1, 2))], 1)


def test_missing_branch_raises_guard_violation():
    with pytest.raises(GuardViolation):
        enclose(branch("y**2 - x - 3", 0, (0, 1)), [Interval(mpq(1, 2))])


def test_order_cap():
    with pytest.raises(OrderTooLarge):
        jet_eval(x1, [Interval(0, 1)], 9)


def test_expression_text_round_trip():
    e = branch("y**2 - x") * x1 + x1 ** 3 - const(mpq(1, 3))
    assert from_text(to_text(e)) == e
    assert from_text("(rootof (poly (vars x y) (term 1 ((y 2))) (term -1 ((x 1)))) 0 (box 0 2) (var 1))") \
        == branch("y**2 - x")


def test_substitution_and_simplify():
    e = substitute(x1 ** 2 + x1, {1: x1 * const(2)})
    assert to_poly(simplify(e)) == parse_infix("4*x1**2 + 2*x1", ["x1"])


def test_float_evaluation_tracks_branch():
    e = branch("x**2 + y**2 - 1", 0, (0, 2))
    assert abs(eval_float(e, [0.6]) - 0.8) < 1e-12
    assert math.isnan(eval_float(branch("y**2 - x - 3", 0, (0, 1)), [0.5]))
