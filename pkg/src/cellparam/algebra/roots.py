"""Certified real root isolation and real algebraic numbers.

Univariate polynomials are handled as dense mpq lists, lowest degree first.
Isolation uses the Descartes rule of signs with bisection on the square-free
part; signs at algebraic points are decided by interval refinement backed by
an exact zero test.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple, Union

from gmpy2 import mpq

from .poly import Poly, Q, Rational, poly_resultant

Dense = List[Rational]


# dense univariate helpers

def trim(p: Sequence) -> Dense:
    p = list(p)
    while p and not p[-1]:
        p.pop()
    return p


def dense_eval(p: Sequence, x):
    acc = mpq(0)
    for c in reversed(p):
        acc = acc * x + c
    return acc


def dense_derivative(p: Sequence) -> Dense:
    return [c * k for k, c in enumerate(p)][1:]


def dense_divmod(a: Sequence, b: Sequence) -> Tuple[Dense, Dense]:
    a, b = trim(a), trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    q = [mpq(0)] * max(len(a) - len(b) + 1, 0)
    r = list(a)
    lb = b[-1]
    while len(r) >= len(b) and r:
        shift = len(r) - len(b)
        f = r[-1] / lb
        q[shift] = f
        for i, c in enumerate(b):
            r[shift + i] -= f * c
        r = trim(r[:-1]) if not r[-1] else trim(r)
    return trim(q), trim(r)


def dense_gcd(a: Sequence, b: Sequence) -> Dense:
    a, b = trim(a), trim(b)
    while b:
        a, b = b, dense_divmod(a, b)[1]
    if not a:
        return []
    lead = a[-1]
    return [c / lead for c in a]


def square_free(p: Sequence) -> Dense:
    """Square-free part, made monic."""
    p = trim(p)
    if len(p) <= 1:
        return [mpq(1)] if p else []
    g = dense_gcd(p, dense_derivative(p))
    q, r = dense_divmod(p, g)
    assert not r
    return [c / q[-1] for c in q]


def sign(x) -> int:
    return (x > 0) - (x < 0)


def _sign_variations(coeffs: Sequence) -> int:
    last, count = 0, 0
    for c in coeffs:
        s = sign(c)
        if s:
            if last and s != last:
                count += 1
            last = s
    return count


def _taylor_shift(p: Sequence, a) -> Dense:
    """Coefficients of p(x + a)."""
    q = list(p)
    n = len(q)
    for i in range(n):
        for k in range(n - 2, i - 1, -1):
            q[k] += a * q[k + 1]
    return q


def descartes_bound(p: Sequence, a, b) -> int:
    """Descartes bound on the number of roots in the open interval (a, b)."""
    n = len(p) - 1
    if n < 1:
        return 0
    # q(x) = p(a + (b - a) x)
    w = b - a
    q = _taylor_shift(p, a)
    scale = mpq(1)
    for i in range(len(q)):
        q[i] *= scale
        scale *= w
    # roots in (0,1) of q <-> positive roots of (x+1)^n q(1/(x+1))
    return _sign_variations(_taylor_shift(list(reversed(q)), mpq(1)))


def cauchy_bound(p: Sequence) -> Rational:
    p = trim(p)
    lead = abs(p[-1])
    return 1 + max((abs(c) / lead for c in p[:-1]), default=mpq(0))


@dataclass(frozen=True)
class IsolatingInterval:
    """Open interval (lo, hi) holding exactly one root of the square-free ``poly``.

    ``poly`` is a dense monic square-free coefficient list.  A rational root is
    kept as a degenerate interval with ``lo == hi`` once it is hit exactly.
    """

    lo: Rational
    hi: Rational
    poly: Tuple[Rational, ...]
    squarefree: bool = True

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    @property
    def width(self) -> Rational:
        return self.hi - self.lo

    def midpoint(self) -> Rational:
        return (self.lo + self.hi) / 2

    def __float__(self) -> float:
        return float(self.midpoint())


def isolate_real_roots(p, lo=None, hi=None) -> List[IsolatingInterval]:
    """Isolate the real roots of ``p`` inside the open range (lo, hi), sorted.

    ``p`` may be a univariate Poly or a dense list.  Omitted bounds default to
    a Cauchy root bound.
    """
    dense = p.univariate_coeffs() if isinstance(p, Poly) else [Q(c) for c in p]
    dense = trim(dense)
    if not dense:
        raise ValueError("cannot isolate roots of the zero polynomial")
    sf = square_free(dense)
    if len(sf) <= 1:
        return []
    bound = cauchy_bound(sf)
    lo = -bound if lo is None else Q(lo)
    hi = bound if hi is None else Q(hi)
    if lo >= hi:
        return []
    key = tuple(sf)
    out: List[IsolatingInterval] = []
    stack = [(lo, hi)]
    while stack:
        a, b = stack.pop()
        v = descartes_bound(sf, a, b)
        if v == 0:
            continue
        if v == 1:
            out.append(_clean_endpoints(IsolatingInterval(a, b, key)))
            continue
        m = _split_point(sf, a, b)
        if dense_eval(sf, m) == 0:
            out.append(IsolatingInterval(m, m, key))
        stack.append((a, m))
        stack.append((m, b))
    out.sort(key=lambda iv: (iv.lo, iv.hi))
    return out


def _split_point(sf, a, b):
    return (a + b) / 2


def _clean_endpoints(iv: IsolatingInterval) -> IsolatingInterval:
    """Move endpoints that are themselves roots strictly inside."""
    p, a, b = iv.poly, iv.lo, iv.hi
    while dense_eval(p, a) == 0 or dense_eval(p, b) == 0:
        m = (a + b) / 2
        if dense_eval(p, m) == 0:
            return IsolatingInterval(m, m, p)
        if descartes_bound(p, a, m) >= 1:
            b = m
        else:
            a = m
    return IsolatingInterval(a, b, p)


def refine_root(iso: IsolatingInterval, width) -> IsolatingInterval:
    """Bisect until ``hi - lo <= width``; the root stays isolated."""
    width = Q(width)
    p, a, b = iso.poly, iso.lo, iso.hi
    if a == b:
        return iso
    sa = sign(dense_eval(p, a))
    if sa == 0 or sign(dense_eval(p, b)) == 0:
        iso = _clean_endpoints(iso)
        p, a, b = iso.poly, iso.lo, iso.hi
        if a == b:
            return iso
        sa = sign(dense_eval(p, a))
    while b - a > width:
        m = (a + b) / 2
        sm = sign(dense_eval(p, m))
        if sm == 0:
            return IsolatingInterval(m, m, p)
        if sm == sa:
            a = m
        else:
            b = m
    c = _snap(p, a, b)
    if c is not None:
        return IsolatingInterval(c, c, p)
    return IsolatingInterval(a, b, p)


def _snap(p, a, b, max_den=2**32):
    """A small-denominator rational root in ``[a, b]``, if one exists."""
    mid = Fraction(int((a + b).numerator), 2 * int((a + b).denominator))
    c = mpq(mid.limit_denominator(max_den))
    if a <= c <= b and dense_eval(p, c) == 0:
        return c
    return None


class AlgebraicNumber:
    """A real algebraic number: a rational, or a root pinned by an isolating interval."""

    __slots__ = ("iso", "value")

    def __init__(self, value: Union[IsolatingInterval, object]):
        if isinstance(value, IsolatingInterval):
            if value.exact:
                self.iso, self.value = None, value.lo
            else:
                self.iso, self.value = value, None
        elif isinstance(value, AlgebraicNumber):
            self.iso, self.value = value.iso, value.value
        else:
            self.iso, self.value = None, Q(value)

    @property
    def is_rational(self) -> bool:
        return self.iso is None

    def interval(self, width=mpq(1, 2**60)) -> Tuple[Rational, Rational]:
        if self.iso is None:
            return self.value, self.value
        if self.iso.width > width:
            self.iso = refine_root(self.iso, width)
            if self.iso.exact:
                self.iso, self.value = None, self.iso.lo
                return self.value, self.value
        return self.iso.lo, self.iso.hi

    def defining_poly(self) -> Dense:
        if self.iso is None:
            return [-self.value, mpq(1)]
        return list(self.iso.poly)

    def approx(self) -> Rational:
        lo, hi = self.interval()
        return (lo + hi) / 2

    def __float__(self) -> float:
        return float(self.approx())

    def compare(self, other) -> int:
        """Exact comparison with another algebraic number or rational."""
        other = other if isinstance(other, AlgebraicNumber) else AlgebraicNumber(other)
        if self.is_rational and other.is_rational:
            return sign(self.value - other.value)
        if other.is_rational:
            return _sign_of_root_minus(self, other.value)
        if self.is_rational:
            return -_sign_of_root_minus(other, self.value)
        g = dense_gcd(self.defining_poly(), other.defining_poly())
        both_roots = len(g) > 1 and sign_univariate(g, self) == 0 and sign_univariate(g, other) == 0
        width = mpq(1, 2**30)
        while True:
            a0, a1 = self.interval(width)
            b0, b1 = other.interval(width)
            if a1 < b0:
                return -1
            if b1 < a0:
                return 1
            if both_roots and descartes_bound(g, min(a0, b0), max(a1, b1)) == 1:
                return 0
            width /= 2**20

    def __eq__(self, other) -> bool:
        try:
            return self.compare(other) == 0
        except TypeError:
            return NotImplemented

    def __lt__(self, other) -> bool:
        return self.compare(other) < 0

    def __le__(self, other) -> bool:
        return self.compare(other) <= 0

    def __gt__(self, other) -> bool:
        return self.compare(other) > 0

    def __ge__(self, other) -> bool:
        return self.compare(other) >= 0

    def __hash__(self):
        return hash(round(float(self), 9))

    def __repr__(self) -> str:
        return f"AlgebraicNumber({self})"

    def __str__(self) -> str:
        return str(self.value) if self.is_rational else f"~{float(self):.12g}"


def _root_in(g, a, b) -> bool:
    if a == b:
        return dense_eval(g, a) == 0
    return sign(dense_eval(g, a)) * sign(dense_eval(g, b)) < 0 or \
        dense_eval(g, a) == 0 or dense_eval(g, b) == 0


def _sign_of_root_minus(alpha: AlgebraicNumber, q: Rational) -> int:
    p = alpha.defining_poly()
    if dense_eval(p, q) == 0:
        return 0
    width = mpq(1, 2**30)
    while True:
        lo, hi = alpha.interval(width)
        if hi < q:
            return -1
        if lo > q:
            return 1
        if alpha.is_rational:
            return sign(alpha.value - q)
        width /= 2**20


def real_roots(p, lo=None, hi=None) -> List[AlgebraicNumber]:
    return [AlgebraicNumber(iv) for iv in isolate_real_roots(p, lo, hi)]


# signs at algebraic points

def _interval_eval(p: Poly, boxes) -> Tuple[Rational, Rational]:
    from ..jets.interval import Interval
    vals = {v: Interval(lo, hi) for v, (lo, hi) in boxes.items()}
    r = p.evaluate(vals)
    if not isinstance(r, Interval):
        r = Interval(r, r)
    return r.lo, r.hi


def sign_at(p: Poly, point) -> int:
    """Exact sign of ``p`` at a point with rational/algebraic coordinates.

    ``point`` maps variable names to rationals or AlgebraicNumbers (a sequence
    is matched against ``p.vars`` in order).
    """
    if not isinstance(point, dict):
        point = dict(zip(p.vars, point))
    nums = {v: (x if isinstance(x, AlgebraicNumber) else AlgebraicNumber(x)) for v, x in point.items()}
    rational = {v: a.value for v, a in nums.items() if a.is_rational}
    reduced = p.subs(rational) if rational else p
    alg = {v: a for v, a in nums.items() if not a.is_rational and reduced.involves(v)}
    if reduced.is_constant():
        return sign(reduced.constant_value() if reduced.terms else 0)
    missing = [v for v in reduced.used_vars() if v not in alg]
    if missing:
        raise ValueError(f"no value for variables {missing}")
    if len(alg) == 1:
        (v, a), = alg.items()
        return sign_univariate(reduced.univariate_coeffs(), a)
    if not _may_vanish(reduced, alg):
        return _sign_by_refinement(reduced, alg, None)
    return _sign_by_refinement(reduced, alg, mpq(1, 2**300))


def sign_univariate(coeffs: Sequence, a: AlgebraicNumber) -> int:
    coeffs = trim(coeffs)
    if not coeffs:
        return 0
    if a.is_rational:
        return sign(dense_eval(coeffs, a.value))
    g = dense_gcd(coeffs, a.defining_poly())
    if len(g) > 1:
        lo, hi = a.interval()
        while True:
            if lo == hi:
                if dense_eval(g, lo) == 0:
                    return 0
                break
            n = descartes_bound(g, lo, hi)
            if n == 0:
                break
            if _root_in(g, lo, hi) and n == 1:
                return 0
            lo, hi = a.interval((hi - lo) / 4)
    width = mpq(1, 2**30)
    from ..jets.interval import Interval
    while True:
        lo, hi = a.interval(width)
        r = _dense_interval(coeffs, Interval(lo, hi))
        if r.lo > 0:
            return 1
        if r.hi < 0:
            return -1
        width /= 2**16


def _dense_interval(coeffs, x):
    acc = None
    for c in reversed(coeffs):
        acc = x * 0 + c if acc is None else acc * x + c
    return acc


def _may_vanish(p: Poly, alg) -> bool:
    """Resultant filter: False certifies p is nonzero at the algebraic point."""
    vs = list(alg)
    cur = p
    for v in vs[1:]:
        m = Poly.from_univariate(alg[v].defining_poly(), v)
        cur = poly_resultant(cur, m.with_vars(cur.vars if v in cur.vars else (v,)), v) \
            if cur.involves(v) else cur
    first = vs[0]
    if cur.is_zero():
        return True
    uni = cur.univariate_coeffs() if cur.involves(first) else None
    if uni is None:
        return cur.is_zero()
    return sign_univariate(uni, alg[first]) == 0


def _sign_by_refinement(p: Poly, alg, floor) -> int:
    width = mpq(1, 2**30)
    while True:
        boxes = {v: a.interval(width) for v, a in alg.items()}
        lo, hi = _interval_eval(p, boxes)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if floor is not None and width < floor:
            return 0
        width /= 2**20
