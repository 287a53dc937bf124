from gmpy2 import mpq
import pytest
from hypothesis import given, settings, strategies as st

from cellparam.algebra.roots import AlgebraicNumber
from cellparam.cells import check_cellular, Parametrization
from cellparam.certify import check_cover
from cellparam.jets.expr import to_poly
from cellparam.jets.floats import eval_float
from cellparam.algebra.factor import parse_infix
from cellparam.param1d import (DimensionTooHigh, PiecewiseAlgebraicFunction, PreconditionFail, SemialgebraicSet2D,
                               kill_derivative, monotone_partition, parametrize_curve, parametrize_function_1d)


def curve(text):
    return SemialgebraicSet2D.of((text, "=0"))


def _contract(par, X, n=200):
    assert par.all_certified()
    assert all(check_cellular(p.map).ok for p in par.pieces)
    report = check_cover(par, X, n)
    assert report.ok, report.summary()


def test_diagonal_is_one_piece():
    X = curve("y - x")
    par, sigma = parametrize_curve(X, 2)
    assert len(par.pieces) == 1 and sigma == []
    _contract(par, X)


def test_parabola_has_one_exceptional_point():
    X = curve("y^2 - x")
    par, sigma = parametrize_curve(X, 2)
    # slope one at (1/4, 1/2) splits the branch into a steep and a flat part
    assert sigma == [(AlgebraicNumber(mpq(1, 4)), AlgebraicNumber(mpq(1, 2)))]
    assert len(par.pieces) == 3
    _contract(par, X)


def test_circle():
    X = curve("(x-1/2)^2 + (y-1/2)^2 - 1/16")
    par, _ = parametrize_curve(X, 2)
    _contract(par, X)


def test_vertical_segment():
    X = curve("x - 1/3")
    par, _ = parametrize_curve(X, 3)
    assert [p.map.cell.kinds for p in par.pieces] == [("0", "I")]
    _contract(par, X, 50)


def test_curve_pipeline_rejects_open_sets():
    with pytest.raises(DimensionTooHigh):
        parametrize_curve(SemialgebraicSet2D.of(("x - y", "<0")), 2)


def test_missing_piece_is_detected():
    X = curve("(x-1/2)^2 + (y-1/2)^2 - 1/16")
    par, _ = parametrize_curve(X, 2, certify=False)
    cut = Parametrization(par.r, [p for p in par.pieces if p.map.cell.dim][1:], par.target)
    report = check_cover(cut, X, 200)
    assert report.misses


def test_function_pullbacks_certified():
    f = PiecewiseAlgebraicFunction.branch("y^2 - x", 0)
    par = parametrize_function_1d(f, 2)
    assert par.all_certified()
    assert check_cover(par, f, 200).ok
    # pullbacks agree with the function at the mapped point
    for piece in par.pieces:
        if piece.map.cell.dim:
            t = 0.37
            xv = eval_float(piece.map.coords[0], [t])
            assert eval_float(piece.pullbacks[0], [t]) == pytest.approx(xv ** 0.5, rel=1e-9)


def test_three_halves_power_kill_level():
    f = PiecewiseAlgebraicFunction.branch("y^2 - 4/9*x^3", 0)
    par = kill_derivative(f, 2)
    assert len(par.pieces) == 2 and par.all_certified()
    assert to_poly(par.pieces[0].pullbacks[0]) == parse_infix("1/12*x1^3", ["x1"])
    assert par.trace[0]["squared_at"] == 0 and par.trace[0]["K"] == 2
    assert par.trace[0]["bound"] == ["2", "2"]


def test_kill_derivative_precondition():
    with pytest.raises(PreconditionFail):
        kill_derivative(PiecewiseAlgebraicFunction.branch("y^2 - x", 0), 2)


def test_monotone_partition_of_cubic():
    f = PiecewiseAlgebraicFunction.polynomial("x1^3 - x1/2 + 1/2")
    intervals, points = monotone_partition(f, 1)
    # f' = 3x^2 - 1/2 vanishes at 1/sqrt(6), f'' at 0
    assert [float(p) for p in points] == pytest.approx([0, 6 ** -0.5, 1])
    assert len(intervals) == 2


@settings(max_examples=8, deadline=None)
@given(st.integers(1, 9), st.integers(1, 9))
def test_lines_through_square_are_certified(a, b):
    # y = (a/10) x + b/20 stays in the square on (0,1)
    X = curve(f"y - {a}/10*x - {b}/20")
    par, _ = parametrize_curve(X, 2)
    _contract(par, X, 30)
