"""Closed intervals with exact rational endpoints.

Endpoints stay exact while they are small.  Once a denominator grows past
``ROUND_TRIGGER_BITS`` the endpoints are rounded outward to dyadic rationals
carrying ``ROUND_PRECISION`` significant bits, so enclosures remain valid and
endpoint sizes stay bounded.
"""

from __future__ import annotations

import gmpy2
from gmpy2 import mpq

from ..algebra.poly import Q, Rational

ROUND_TRIGGER_BITS = 192
ROUND_PRECISION = 128

_DOWN = gmpy2.context(precision=ROUND_PRECISION, round=gmpy2.RoundDown)
_UP = gmpy2.context(precision=ROUND_PRECISION, round=gmpy2.RoundUp)
_ZERO = mpq(0)


def _round_down(x: Rational) -> Rational:
    if x.denominator.bit_length() <= ROUND_TRIGGER_BITS:
        return x
    return mpq(_DOWN.div(x.numerator, x.denominator))


def _round_up(x: Rational) -> Rational:
    if x.denominator.bit_length() <= ROUND_TRIGGER_BITS:
        return x
    return mpq(_UP.div(x.numerator, x.denominator))


class Interval:
    __slots__ = ("lo", "hi")

    def __init__(self, lo, hi=None):
        lo = Q(lo)
        hi = lo if hi is None else Q(hi)
        if lo > hi:
            raise ValueError(f"empty interval [{lo}, {hi}]")
        self.lo = _round_down(lo)
        self.hi = _round_up(hi)

    @classmethod
    def _raw(cls, lo, hi) -> "Interval":
        iv = object.__new__(cls)
        iv.lo = _round_down(lo)
        iv.hi = _round_up(hi)
        return iv

    @staticmethod
    def coerce(x) -> "Interval":
        return x if isinstance(x, Interval) else Interval(x)

    # queries
    @property
    def width(self) -> Rational:
        return self.hi - self.lo

    def mid(self) -> Rational:
        return (self.lo + self.hi) / 2

    def mag(self) -> Rational:
        """Largest absolute value in the interval."""
        return max(-self.lo, self.hi)

    def mig(self) -> Rational:
        """Smallest absolute value in the interval."""
        if self.lo > 0:
            return self.lo
        if self.hi < 0:
            return -self.hi
        return _ZERO

    def contains(self, x) -> bool:
        if isinstance(x, Interval):
            return self.lo <= x.lo and x.hi <= self.hi
        x = Q(x)
        return self.lo <= x <= self.hi

    def contains_zero(self) -> bool:
        return self.lo <= 0 <= self.hi

    def intersects(self, other: "Interval") -> bool:
        return self.lo <= other.hi and other.lo <= self.hi

    def hull(self, other) -> "Interval":
        other = Interval.coerce(other)
        return Interval._raw(min(self.lo, other.lo), max(self.hi, other.hi))

    def intersect(self, other: "Interval") -> "Interval":
        return Interval(max(self.lo, other.lo), min(self.hi, other.hi))

    def bisect(self):
        m = self.mid()
        return Interval._raw(self.lo, m), Interval._raw(m, self.hi)

    def is_point(self) -> bool:
        return self.lo == self.hi

    # arithmetic
    def __add__(self, other) -> "Interval":
        if isinstance(other, Interval):
            return Interval._raw(self.lo + other.lo, self.hi + other.hi)
        c = Q(other)
        return Interval._raw(self.lo + c, self.hi + c)

    __radd__ = __add__

    def __neg__(self) -> "Interval":
        return Interval._raw(-self.hi, -self.lo)

    def __sub__(self, other) -> "Interval":
        if isinstance(other, Interval):
            return Interval._raw(self.lo - other.hi, self.hi - other.lo)
        c = Q(other)
        return Interval._raw(self.lo - c, self.hi - c)

    def __rsub__(self, other) -> "Interval":
        c = Q(other)
        return Interval._raw(c - self.hi, c - self.lo)

    def __mul__(self, other) -> "Interval":
        if isinstance(other, Interval):
            a, b, c, d = self.lo, self.hi, other.lo, other.hi
            if a >= 0 and c >= 0:
                return Interval._raw(a * c, b * d)
            p = (a * c, a * d, b * c, b * d)
            return Interval._raw(min(p), max(p))
        c = Q(other)
        if c >= 0:
            return Interval._raw(self.lo * c, self.hi * c)
        return Interval._raw(self.hi * c, self.lo * c)

    __rmul__ = __mul__

    def reciprocal(self) -> "Interval":
        if self.lo <= 0 <= self.hi:
            raise ZeroDivisionError(f"interval {self} contains zero")
        return Interval._raw(1 / self.hi, 1 / self.lo)

    def __truediv__(self, other) -> "Interval":
        if isinstance(other, Interval):
            return self * other.reciprocal()
        return self * (1 / Q(other))

    def __rtruediv__(self, other) -> "Interval":
        return self.reciprocal() * Q(other)

    def __pow__(self, n: int) -> "Interval":
        if n == 0:
            return Interval._raw(mpq(1), mpq(1))
        if n == 1:
            return self
        lo, hi = self.lo ** n, self.hi ** n
        if n % 2:
            return Interval._raw(lo, hi)
        if self.lo >= 0:
            return Interval._raw(lo, hi)
        if self.hi <= 0:
            return Interval._raw(hi, lo)
        return Interval._raw(_ZERO, max(lo, hi))

    def square(self) -> "Interval":
        return self ** 2

    def __eq__(self, other) -> bool:
        if isinstance(other, Interval):
            return self.lo == other.lo and self.hi == other.hi
        return NotImplemented

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self) -> str:
        if self.lo == self.hi:
            return f"[{self.lo}]"
        return f"[{float(self.lo):.6g}, {float(self.hi):.6g}]"

    def as_tuple(self):
        return self.lo, self.hi


def hull_all(intervals) -> Interval:
    it = iter(intervals)
    out = next(it)
    for iv in it:
        out = out.hull(iv)
    return out
