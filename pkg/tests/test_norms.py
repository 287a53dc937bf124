from gmpy2 import mpq

from cellparam.algebra.factor import parse_infix
from cellparam.certify import FAIL, PASS, UNDECIDED, certify_norm, measure_norm
from cellparam.jets.expr import RootOf, const, var
from cellparam.jets.interval import Interval
from cellparam.jets.jet import jet_eval

x1, x2 = var(1), var(2)


def test_identity_passes_with_exact_bounds():
    cert = certify_norm(x1, ("I",), 3)
    assert cert.verdict == PASS
    assert cert.bounds[(0,)] == Interval(1) and cert.bounds[(1,)] == Interval(1)
    assert cert.bounds[(2,)] == Interval(0) and cert.bounds[(3,)] == Interval(0)


def test_doubling_fails_with_reproducible_witness():
    cert = certify_norm(const(2) * x1, ("I",), 1)
    assert cert.verdict == FAIL
    box, alpha, enc = cert.witness
    assert alpha == (1,) and enc == Interval(2)
    again = jet_eval(const(2) * x1, box, 1)[alpha]
    assert again.mig() > 1


def test_unbounded_derivative_fails():
    sqrt = RootOf(parse_infix("y**2 - x", ["x", "y"]), (x1,), 0, (mpq(0), mpq(2)))
    cert = certify_norm(sqrt, ("I",), 1)
    assert cert.verdict == FAIL and cert.witness[1] == (1,)


def test_depth_limit_gives_undecided():
    # sup is exactly 1 at x = 1/2; the naive enclosure [0, 4] needs subdivision
    e = const(4) * x1 * (1 - x1)
    assert certify_norm(e, ("I",), 0, max_depth=0).verdict == UNDECIDED
    assert certify_norm(e, ("I",), 0).verdict == PASS


def test_two_dimensional_cell_and_point_factor():
    assert certify_norm(x1 * x2, ("I", "I"), 2).passed
    cert = certify_norm(const(mpq(1, 2)) * x1 * x1 + x2, ("I", "0"), 2)
    assert cert.passed and set(cert.bounds) == {(0, 0), (1, 0), (2, 0)}


def test_measure_norm_finds_smallest_integer_bound():
    k, cert = measure_norm(const(mpq(2, 3)) * x1 ** 3, ("I",), 2)
    assert k == 2 and cert.bound == 2
    k, _ = measure_norm(const(5) * x1, ("I",), 1)
    assert k == 5


def test_certificate_digest_is_deterministic():
    a = certify_norm(x1 * x2, ("I", "I"), 2)
    b = certify_norm(x1 * x2, ("I", "I"), 2)
    assert a.digest() == b.digest()
    assert a.to_sexpr()[0] == "certificate"
