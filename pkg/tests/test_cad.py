from gmpy2 import mpq
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from cellparam.algebra.factor import parse_infix
from cellparam.algebra.roots import AlgebraicNumber
from cellparam.cad import XY, decompose, in_set, rational_between, simplest_between, y_critical_points
from cellparam.param2d import cad2
from cellparam.jets.floats import eval_float

x, y = sympy.symbols("x y")


def P(text):
    return parse_infix(text, XY)


def _sympy_breakpoints(text):
    """Roots in (0,1) of discriminant, leading coefficient and boundary values, via sympy."""
    q = sympy.sympify(text.replace("^", "**"))
    cands = [sympy.discriminant(q, y), sympy.LC(sympy.Poly(q, y)), q.subs(y, 0), q.subs(y, 1)]
    out = set()
    for c in cands:
        c = sympy.Poly(sympy.expand(c), x)
        if c.degree() <= 0:
            continue
        out |= {float(r) for r in sympy.real_roots(c) if 0 < r < 1}
    return sorted(out)


@pytest.mark.parametrize("text", ["x*y - 1/4", "y^2 - x", "(x-1/2)^2 + (y-1/2)^2 - 1/16", "y - x^2 + 1/3"])
def test_breakpoints_match_sympy(text):
    dec = decompose([P(text)])
    assert [float(c) for c in dec.critical] == pytest.approx(_sympy_breakpoints(text), abs=1e-12)


def test_hyperbola_enters_at_one_quarter():
    cells = cad2([P("x*y - 1/4")])
    bases = {c.base for c in cells if c.kind == "sector"}
    assert (AlgebraicNumber(0), AlgebraicNumber(mpq(1, 4))) in bases
    over_right = [c for c in cells if c.base == (AlgebraicNumber(mpq(1, 4)), AlgebraicNumber(1))]
    assert sorted(c.kind for c in over_right) == ["section", "sector", "sector"]


def test_vertical_line_gives_two_slabs_and_a_segment():
    cells = cad2([P("x - 1/2")])
    assert [c.kind for c in cells].count("sector") == 2
    segs = [c for c in cells if c.kind == "segment"]
    assert len(segs) == 1 and segs[0].base == (AlgebraicNumber(mpq(1, 2)),)


def test_parabola_has_no_interior_breakpoints():
    cells = cad2([P("y^2 - x")])
    assert all(c.kind in ("sector", "section") for c in cells)
    assert len(cells) == 3


def test_cad2_rejects_bad_input():
    with pytest.raises(ValueError):
        cad2([])
    with pytest.raises(ValueError):
        cad2([P("x - x")])


@pytest.mark.parametrize("text", ["x*y - 1/4", "(x-1/2)^2 + (y-1/2)^2 - 1/16", "y^2 - x^3", "x^2 - y"])
def test_sectors_are_sign_invariant(text):
    q = sympy.sympify(text.replace("^", "**"))
    for cell in cad2([P(text)]):
        if cell.kind != "sector":
            continue
        lo, hi = (float(v) for v in cell.base)
        signs = set()
        for t in (0.1, 0.5, 0.9):
            xs = lo + (hi - lo) * t
            a, b = eval_float(cell.lower, [xs]), eval_float(cell.upper, [xs])
            assert a < b
            signs |= {sympy.sign(q.subs({x: xs, y: a + (b - a) * s})) for s in (0.1, 0.5, 0.9)}
        assert len(signs) == 1


@settings(max_examples=40, deadline=None)
@given(st.fractions(min_value=0, max_value=1), st.fractions(min_value=0, max_value=1))
def test_simplest_between_is_inside(a, b):
    lo, hi = sorted((mpq(a.numerator, a.denominator), mpq(b.numerator, b.denominator)))
    if lo == hi:
        return
    c = simplest_between(lo, hi)
    assert lo <= c <= hi


def test_in_set_is_exact_on_rational_points():
    cons = [(P("x*y - 1/100"), "=0")]
    assert in_set(cons, (mpq(1, 10), mpq(1, 10)))
    assert not in_set(cons, (mpq(1, 10), mpq(1, 9)))


def test_y_critical_points_of_circle():
    pts = y_critical_points([P("(x-1/2)^2 + (y-1/2)^2 - 1/16")])
    # top and bottom of the circle: both lie over x = 1/2
    assert [float(p) for p in pts] == pytest.approx([0.5])
