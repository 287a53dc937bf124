from gmpy2 import mpq
import pytest

from cellparam.algebra.factor import parse_infix
from cellparam.cad import UNIT
from cellparam.certify import certify_norm
from cellparam.jets.expr import RootOf, const, from_poly, simplify, substitute, to_poly, var
from cellparam.jets.reduce import reduce_expr
from cellparam.reparam import GRID, growth_cap, kill_level, reparametrize, sign_change_points, subdivide

x1 = var(1)


def root(text, index=0, count=1):
    return RootOf(parse_infix(text, ["x", "y"]), (x1,), index, UNIT, count)


def test_growth_cap_values():
    assert [growth_cap(k) for k in (1, 2, 3)] == [4, 32, 384]


def test_subdivide_is_affine_tiling():
    parts = subdivide(x1, 3)
    assert [to_poly(p) for p in parts] == [parse_infix(t, ["x1"]) for t in ("x1/3", "x1/3 + 1/3", "x1/3 + 2/3")]


def test_sign_change_points_of_linear_function():
    from cellparam.jets.interval import Interval
    pts = sign_change_points(lambda t: Interval(t - mpq(1, 3)))
    assert len(pts) == 1 and abs(pts[0] - mpq(1, 3)) < mpq(1, 2**30)
    assert GRID[0] > 0 and GRID[-1] < 1


def test_flat_input_is_untouched():
    records = []
    assert kill_level([x1], 2, records) == [x1]
    assert records[0].subdivision == 1 and records[0].end is None


def test_three_halves_power_needs_one_square():
    # (2/3) x^(3/2): squaring gives (2/3) x^3, whose normalized second derivative peaks at 2
    f = root("y^2 - 4/9*x^3")
    records = []
    taus = kill_level([f], 2, records)
    assert len(taus) == 2
    assert records[0].end == 0 and records[0].subdivision == 2
    for t in taus:
        assert certify_norm(reduce_expr(substitute(f, {1: t})), ("I",), 2).passed


def test_reparametrize_sqrt():
    f = root("y^2 - x")
    sig = reparametrize([x1, f], 3, square_first=True)
    for s in sig:
        for c in (s, reduce_expr(substitute(f, {1: s}))):
            assert certify_norm(c, ("I",), 3, keep_leaves=False).passed


def test_reduce_collapses_square_root_of_square():
    f = root("y^2 - x")
    assert to_poly(reduce_expr(substitute(f, {1: x1 * x1}))) == parse_infix("x1", ["x1"])


def test_square_first_squares_at_level_one():
    records = []
    reparametrize([x1, const(mpq(1, 2)) * root("y^2 - x")], 1, square_first=True, records=records)
    assert records[0].end == 0
