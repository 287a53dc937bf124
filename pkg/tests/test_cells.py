from gmpy2 import mpq
import pytest

from cellparam.algebra.factor import parse_infix
from cellparam.cells import (BasicCell, CellularMap, ImageEscapesDomain, Parametrization, Piece,
                             check_cellular, compose_cellular, invert_point, linear_subdivision)
from cellparam.certify import certify_norm
from cellparam.jets.expr import RootOf, const, to_poly, var
from cellparam.jets.floats import eval_float

x1, x2 = var(1), var(2)
I, I0, II = BasicCell.of("I"), BasicCell.of("I0"), BasicCell.of("II")
SQRT = RootOf(parse_infix("y**2 - x", ["x", "y"]), (x1,), 0, (mpq(0), mpq(2)))


def test_identity_is_neutral():
    m = CellularMap(II, (x1 * x1, x2 * x1))
    for out in (compose_cellular(CellularMap.identity(II), m), compose_cellular(m, CellularMap.identity(II))):
        assert [to_poly(c, 2) for c in out.coords] == [to_poly(c, 2) for c in m.coords]


def test_square_after_square_is_fourth_power():
    sq = CellularMap(I, (x1 * x1,))
    out = compose_cellular(sq, sq)
    assert to_poly(out.coords[0]) == parse_infix("x1**4", ["x1"])


def test_escaping_image_is_rejected():
    with pytest.raises(ImageEscapesDomain):
        compose_cellular(CellularMap(I, (x1,)), CellularMap(I, (const(2) * x1,)))
    with pytest.raises(ImageEscapesDomain):
        compose_cellular(CellularMap(I0, (x1, x2)), CellularMap(II, (x1, x2)))


def test_check_cellular_examples():
    assert check_cellular(CellularMap(I, (x1 * x1,))).ok
    bad = check_cellular(CellularMap(I, (x1 * (1 - x1),)))
    assert bad.status == "Violation"
    tri = check_cellular(CellularMap(II, (x2, x1)))
    assert tri.status == "Violation" and "depends" in tri.reason
    assert check_cellular(CellularMap(I0, (x1, SQRT))).ok
    assert check_cellular(CellularMap(II, (x1, x1 + x2 * (1 - x1)))).ok


def test_linear_subdivision_counts_and_scaling():
    m = CellularMap(II, (x1, x1 * x2))
    assert linear_subdivision(m, 1) == [m]
    pieces = linear_subdivision(m, 3)
    assert len(pieces) == 9
    f = CellularMap(I, (const(4) * x1 * x1 * (1 - x1) ** 0,))
    parts = linear_subdivision(f, 4)
    # first derivatives shrink by the factor, values do not grow
    for p in parts:
        cert = certify_norm(p.coords[0], ("I",), 2, threshold=4)
        assert cert.passed
        assert cert.bounds[(1,)].hi <= 2 and cert.bounds[(2,)].hi <= mpq(4, 16)


def test_subdivision_images_tile_the_image():
    m = CellularMap(I, (x1 * x1,))
    parts = linear_subdivision(m, 4)
    ends = sorted((eval_float(p.coords[0], [0.0]), eval_float(p.coords[0], [1.0])) for p in parts)
    assert ends[0][0] == 0.0 and ends[-1][1] == 1.0
    for (a, b), (c, d) in zip(ends, ends[1:]):
        assert b == pytest.approx(c)


def test_invert_point_finds_preimages():
    m = CellularMap(I0, (x1, SQRT))
    box = invert_point(m, [mpq(1, 4), mpq(1, 2)])
    assert box is not None and box[0].contains(mpq(1, 4))
    assert invert_point(m, [mpq(1, 4), mpq(1, 3)]) is None
    sq = CellularMap(II, (x1 * x1, x2))
    box = invert_point(sq, [mpq(1, 9), mpq(1, 2)], tol=mpq(1, 2**20))
    assert box[0].contains(mpq(1, 3)) and box[0].width <= mpq(1, 2**20)
    assert invert_point(sq, [mpq(3, 2), mpq(1, 2)]) is None


def test_parametrization_text_round_trip():
    par = Parametrization(2, [Piece(CellularMap(I0, (x1, SQRT))), Piece(CellularMap(I, (x1 * x1,)), (x1,))],
                          "demo")
    back = Parametrization.from_text(par.to_text())
    assert back.maps == par.maps and back.r == 2 and back.pieces[1].pullbacks == (x1,)
    assert back.digest() == par.digest()
