import math
import random

from gmpy2 import mpq
import pytest
from hypothesis import given, settings, strategies as st

from cellparam.algebra.factor import parse_infix
from cellparam.algebra.roots import AlgebraicNumber
from cellparam.cad import UNIT
from cellparam.cells import BasicCell, CellularMap, Parametrization, Piece
from cellparam.certify import (EmptySet, HypothesisFail, certify_norm, check_cover, fiber_derivative_bounded,
                               large_derivative_measure, sample_set)
from cellparam.jets.expr import RootOf, const, from_poly, var
from cellparam.jets.floats import eval_float
from cellparam.param1d import PiecewiseAlgebraicFunction, SemialgebraicSet2D

x1, x2 = var(1), var(2)
SQRT = RootOf(parse_infix("y^2 - x", ["x", "y"]), (x1,), 0, UNIT, 1)


def f_eps(eps):
    # f = eps / (eps + 1 - t) is the root of y (eps + 1 - x) - eps
    return PiecewiseAlgebraicFunction.branch(f"y*({eps} + 1 - x) - {eps}", 0)


def test_measure_of_square():
    res = large_derivative_measure(PiecewiseAlgebraicFunction.polynomial("x1^2"), 1)
    assert res.exact == mpq(1, 2)


def test_measure_of_constant_is_zero():
    res = large_derivative_measure(PiecewiseAlgebraicFunction.polynomial("1/3"), 5)
    assert res.enclosure.hi == 0


@pytest.mark.parametrize("k,m", [(1, 1), (4, 3), (10, 6), (20, 10)])
def test_measure_matches_closed_form(k, m):
    eps, M = mpq(1, 2**k), mpq(2**m)
    res = large_derivative_measure(f_eps(eps), M)
    # the slope eps/(eps+1-t)^2 exceeds M on (1 + eps - sqrt(eps/M), 1)
    closed = max(0.0, math.sqrt(eps / M) - eps)
    assert float(res.enclosure.lo) == pytest.approx(closed, abs=1e-15)
    assert res.enclosure.hi - res.enclosure.lo <= mpq(1, 10**20)
    assert res.enclosure.hi <= 1 / (4 * M)


def test_fiber_bounded_for_product():
    rep = fiber_derivative_bounded(x1 * x2, [mpq(k, 10) for k in range(1, 10)])
    assert rep.ok


def test_fiber_bounded_for_sqrt_weight():
    rep = fiber_derivative_bounded(x2 * SQRT, [mpq(k, 8) for k in range(1, 8)])
    assert rep.ok


def test_interior_singular_fiber_is_flagged():
    cbrt = RootOf(parse_infix("y^3 - x + 1/2", ["x", "y"]), (x1,), 0, (mpq(-1), mpq(1)), 1)
    F = const(mpq(1, 2)) + const(mpq(1, 2)) * x2 * cbrt
    rep = fiber_derivative_bounded(F, [mpq(1, 4), mpq(1, 2), mpq(3, 4)], check_hypothesis=False)
    assert rep.exceptional == [mpq(1, 2)]


def test_fiber_hypothesis_is_checked():
    with pytest.raises(HypothesisFail):
        fiber_derivative_bounded(const(2) * x2, [mpq(1, 2)])


def test_samples_on_hyperbola_satisfy_equation_exactly():
    X = SemialgebraicSet2D.of(("x*y - 1/100", "=0"))
    for pt in sample_set(X, 20, seed=3):
        assert X.contains(pt)
        assert pt[0].is_rational and pt[1] == AlgebraicNumber(mpq(1, 100) / pt[0].value)


def test_samples_on_diagonal():
    for px, py in sample_set(SemialgebraicSet2D.of(("y - x", "=0")), 10):
        assert px == py


def test_empty_set_is_reported():
    with pytest.raises(EmptySet):
        sample_set(SemialgebraicSet2D.of(("x + y + 1", "=0")), 5)


def test_identity_covers_square():
    par = Parametrization(1, [Piece(CellularMap.identity(BasicCell.of("II")))])
    rep = check_cover(par, SemialgebraicSet2D.of(("x + 1", ">0")), 100)
    assert rep.hits == 100 and rep.ok


def test_disc_samples_reach_every_cell():
    X = SemialgebraicSet2D.of(("(x-1/2)^2 + (y-1/2)^2 - 1/16", "<0"))
    pts = sample_set(X, 60)
    xs = sorted(float(p[0]) for p in pts)
    assert xs[0] < 0.35 and xs[-1] > 0.65


def _finite_difference_norm(e, r, rng):
    worst = 0.0
    h = 1e-3
    for _ in range(100):
        t = rng.uniform(0.01, 0.99)
        vals = [eval_float(e, [t + k * h]) for k in range(-r, r + 1)]
        worst = max(worst, abs(vals[r]))
        for k in range(1, r + 1):
            # central differences of order k
            d = sum((-1) ** j * math.comb(k, j) * eval_float(e, [t + (k / 2 - j) * h]) for j in range(k + 1))
            worst = max(worst, abs(d / h ** k) / math.factorial(k))
    return worst


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4), st.integers(1, 3))
def test_pass_implies_small_finite_differences(cs, r):
    e = from_poly(parse_infix(" + ".join(f"({c})/4*x1^{k}" for k, c in enumerate(cs)), ["x1"]))
    cert = certify_norm(e, ("I",), r, keep_leaves=False)
    if cert.passed:
        assert _finite_difference_norm(e, r, random.Random(0)) <= 1 + 1e-6
