"""Cylindrical decomposition of the open unit square for a family of polynomials.

The square ``(0,1)^2`` is cut by finitely many critical abscissae into open
strips.  Over each strip the zero set of every input polynomial is a finite
union of disjoint graphs (sections) of analytic functions, and over each
critical abscissa the fiber meets the zero set in finitely many points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Sequence, Tuple

from gmpy2 import mpq

from .algebra.factor import squarefree_factors
from .algebra.poly import Poly, poly_derivative, poly_discriminant, poly_resultant
from .algebra.roots import AlgebraicNumber, isolate_real_roots, sign_at
from .jets.expr import Expr, RootOf, const

XY = ("x", "y")
UNIT = (mpq(0), mpq(1))


def simplest_between(lo, hi):
    """Rational with the smallest denominator in the open interval (lo, hi)."""
    lo, hi = mpq(lo), mpq(hi)
    if not lo < hi:
        raise ValueError("empty interval")
    n = mpq(math.floor(lo))
    if n + 1 < hi:
        return n + 1
    if lo == n:
        return n + mpq(1, math.floor(1 / (hi - n)) + 1)
    return n + 1 / simplest_between(1 / (hi - n), 1 / (lo - n))


def rational_between(a: AlgebraicNumber, b: AlgebraicNumber):
    """A short rational strictly between two algebraic numbers ``a < b``."""
    width = mpq(1, 2**20)
    while True:
        _, ahi = a.interval(width)
        blo, _ = b.interval(width)
        if ahi < blo:
            return simplest_between(ahi, blo)
        width /= 2**20


def alg_const(a: AlgebraicNumber) -> Expr:
    """Closed expression for an algebraic constant."""
    if a.is_rational:
        return const(a.value)
    lo, hi = a.interval(mpq(1, 2**64))
    p = Poly.from_univariate(a.defining_poly(), "y")
    return RootOf(p, (), 0, (lo, hi), 1)


def dedupe_sorted(nums: Iterable[AlgebraicNumber]) -> List[AlgebraicNumber]:
    out: List[AlgebraicNumber] = []
    for a in sorted(nums, key=lambda n: n.approx()):
        if not out or out[-1] != a:
            out.append(a)
    return sorted(out)


def roots_in_unit(p: Poly) -> List[AlgebraicNumber]:
    """Roots in (0,1) of a polynomial in at most one variable."""
    if p.is_zero() or p.is_constant():
        return []
    return [AlgebraicNumber(iv) for iv in isolate_real_roots(p.univariate_coeffs(), *UNIT)]


def swap_xy(p: Poly) -> Poly:
    """Exchange the roles of x and y."""
    p = p.with_vars(XY)
    return Poly(XY, {(b, a): c for (a, b), c in p.terms.items()})


@dataclass
class Section:
    """The ``index``-th of ``count`` roots in (0,1) of ``poly(x, .)`` over a strip."""

    poly: Poly
    index: int
    count: int
    sample_y: AlgebraicNumber

    def expr(self, arg: Expr) -> Expr:
        return RootOf(self.poly, (arg,), self.index, UNIT, self.count)


@dataclass
class Strip:
    lo: AlgebraicNumber
    hi: AlgebraicNumber
    sample: mpq
    sections: List[Section] = field(default_factory=list)


@dataclass
class Fiber:
    x: AlgebraicNumber
    points: List[AlgebraicNumber]
    vertical: bool


@dataclass
class Decomposition:
    factors: List[Poly]
    critical: List[AlgebraicNumber]
    strips: List[Strip]
    fibers: List[Fiber]


def irreducible_factors(polys: Sequence[Poly]) -> List[Poly]:
    seen: Dict[Poly, None] = {}
    for p in polys:
        for f in squarefree_factors(p.with_vars(XY)):
            seen.setdefault(f.with_vars(XY), None)
    return list(seen)


def projection(factors: Sequence[Poly], extra: Sequence[Poly] = ()) -> List[Poly]:
    """Univariate polynomials in x whose roots include every critical abscissa."""
    out: List[Poly] = [q.with_vars(("x",)) for q in extra]
    curved = [q for q in factors if q.involves("y")]
    for q in factors:
        if not q.involves("y"):
            out.append(q.with_vars(("x",)))
    for q in curved:
        out.append(q.leading_coeff("y"))
        if q.degree("y") >= 2:
            out.append(poly_discriminant(q, "y"))
        out.append(q.subs({"y": mpq(0)}))
        out.append(q.subs({"y": mpq(1)}))
    for i, a in enumerate(curved):
        for b in curved[i + 1:]:
            out.append(poly_resultant(a, b, "y"))
    return [p.with_vars(("x",)) for p in out if p.used_vars()]


def flatness_polys(factors: Sequence[Poly]) -> List[Poly]:
    """Abscissae where some section has slope of absolute value exactly one."""
    out = []
    for q in factors:
        if not (q.involves("y") and q.involves("x")):
            continue
        qx, qy = poly_derivative(q, "x"), poly_derivative(q, "y")
        h = qx * qx - qy * qy
        r = poly_resultant(q, h, "y") if h.involves("y") else h
        if not r.is_zero():
            out.append(r.with_vars(("x",)))
    return out


def fiber_points(factors: Sequence[Poly], c: AlgebraicNumber) -> Tuple[List[AlgebraicNumber], bool]:
    """Zero set of the factors on the vertical line ``x = c`` inside (0,1)."""
    pts: List[AlgebraicNumber] = []
    vertical = False
    for q in factors:
        if not q.involves("y"):
            vertical = vertical or sign_at(q.with_vars(("x",)), [c]) == 0
            continue
        if c.is_rational:
            pts += roots_in_unit(q.subs({"x": c.value}).with_vars(("y",)))
            continue
        m = Poly.from_univariate(c.defining_poly(), "x").with_vars(XY)
        res = poly_resultant(q, m, "x").with_vars(("y",))
        for cand in roots_in_unit(res):
            if sign_at(q, {"x": c, "y": cand}) == 0:
                pts.append(cand)
    return dedupe_sorted(pts), vertical


def decompose(polys: Sequence[Poly], extra_x: Sequence[Poly] = (), flat: bool = False,
              extra_points: Sequence[AlgebraicNumber] = ()) -> Decomposition:
    """Decompose ``(0,1)^2`` adapted to ``polys`` (in variables x, y).

    ``extra_x`` adds univariate polynomials whose roots become critical too;
    with ``flat`` the abscissae where a section has slope of absolute value one
    are critical, so the slope bound is constant along each section.
    ``extra_points`` are further critical abscissae in (0,1).
    """
    factors = irreducible_factors(polys)
    proj = projection(factors, extra_x)
    if flat:
        proj += flatness_polys(factors)
    crit: List[AlgebraicNumber] = [a for a in extra_points if 0 < a < 1]
    for p in proj:
        for f in squarefree_factors(p):
            crit += roots_in_unit(f)
    crit = dedupe_sorted(crit)
    bounds = [AlgebraicNumber(0)] + crit + [AlgebraicNumber(1)]
    strips = []
    curved = [q for q in factors if q.involves("y")]
    for a, b in zip(bounds, bounds[1:]):
        s = rational_between(a, b)
        secs = []
        for q in curved:
            ys = roots_in_unit(q.subs({"x": s}).with_vars(("y",)))
            secs += [Section(q, k, len(ys), y) for k, y in enumerate(ys)]
        secs.sort(key=lambda sec: sec.sample_y)
        strips.append(Strip(a, b, s, secs))
    fibers = []
    for c in crit:
        pts, vertical = fiber_points(factors, c)
        fibers.append(Fiber(c, pts, vertical))
    return Decomposition(factors, crit, strips, fibers)


def y_critical_points(factors: Sequence[Poly]) -> List[AlgebraicNumber]:
    """Abscissae of the curve points whose ordinate is critical for the swapped decomposition.

    Over the open intervals between these (and the usual critical abscissae) an
    inverse branch ``x = g(y)`` keeps a constant root index.
    """
    swapped = [swap_xy(q) for q in factors]
    ys: List[AlgebraicNumber] = []
    for p in projection(swapped):
        for f in squarefree_factors(p):
            ys += roots_in_unit(f)
    xs: List[AlgebraicNumber] = []
    curved = [q for q in swapped if q.involves("y")]
    for y in dedupe_sorted(ys):
        xs += fiber_points(curved, y)[0]
    return dedupe_sorted(xs)


def in_set(constraints: Sequence[Tuple[Poly, str]], point) -> bool:
    """Exact membership test for a conjunction of sign conditions."""
    want = {"=0": 0, "<0": -1, ">0": 1}
    for p, rel in constraints:
        if sign_at(p.with_vars(XY), {"x": point[0], "y": point[1]}) != want[rel]:
            return False
    return True

