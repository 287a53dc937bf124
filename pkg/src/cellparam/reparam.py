"""Derivative killing by squaring reparametrizations of the unit interval.

Given coordinate functions ``c_1..c_m`` on ``I = (0,1)`` whose normalized
``C^(s-1)`` norms are at most one, :func:`kill_level` returns finitely many
polynomial reparametrizations ``tau`` of ``I`` whose images tile ``I`` (up to
finitely many points) such that every ``c_i o tau`` has ``C^s`` norm at most
one.  Each piece on which ``|c_i^(s)|`` is monotone is precomposed with
``t -> t^2`` (or ``t -> 1 - (1 - t)^2``, whichever end carries the large
derivative), the resulting norm ``B`` is certified, and a linear subdivision
into ``ceil(B)`` parts finishes the level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence

from gmpy2 import mpq

from .cad import simplest_between
from .certify import certify_norm, measure_norm
from .jets.expr import Expr, const, simplify, substitute, var
from .jets.interval import Interval
from .jets.jet import GuardViolation, jet_eval
from .jets.reduce import reduce_expr

X1 = var(1)
I_KIND = ("I",)


class GrowthBoundExceeded(RuntimeError):
    """A squared piece has a certified norm above the a-priori envelope."""


def growth_cap(level: int) -> int:
    return 4 ** level * math.factorial(level)


def _grid() -> List[mpq]:
    pts = {mpq(j, 64) for j in range(1, 64)}
    for k in range(7, 41):
        pts.add(mpq(1, 2 ** k))
        pts.add(1 - mpq(1, 2 ** k))
    return sorted(pts)


GRID = _grid()


def sign_change_points(fn: Callable[[mpq], Optional[Interval]], lo=mpq(0), hi=mpq(1),
                       tol=mpq(1, 2 ** 40)) -> List[mpq]:
    """Approximate zeros of a function on ``(lo, hi)`` located by sign changes.

    ``fn`` returns a certified enclosure at a rational point (or None).  Sign
    changes between consecutive grid points are bisected to relative width
    ``tol`` and reported as the simplest rational in the final bracket.
    """
    lo, hi = mpq(lo), mpq(hi)
    span = hi - lo

    def sgn(x):
        try:
            v = fn(x)
        except (GuardViolation, ZeroDivisionError):
            return None
        if v is None:
            return None
        if v.lo > 0:
            return 1
        if v.hi < 0:
            return -1
        return 0 if v.lo == v.hi == 0 else None

    pts = [lo + span * g for g in GRID]
    signs = [sgn(p) for p in pts]
    out = []
    prev = None
    for p, s in zip(pts, signs):
        if not s:
            continue
        if prev is not None and prev[1] != s:
            a, b = prev[0], p
            sa = prev[1]
            while b - a > tol * span:
                m = (a + b) / 2
                sm = sgn(m)
                if sm == 0:
                    a = b = m
                    break
                if sm is None:
                    break
                if sm == sa:
                    a = m
                else:
                    b = m
            out.append(simplest_between(a, b) if a < b else a)
        prev = (p, s)
    return sorted(set(out))


def coefficient_at(e: Expr, k: int, x) -> Optional[Interval]:
    """Enclosure of ``e^(k)(x) / k!`` at a rational point."""
    try:
        return jet_eval(e, [Interval(x)], k)[(k,)]
    except (GuardViolation, ZeroDivisionError):
        return None


def affine(a, b) -> Expr:
    """The increasing affine map of ``I`` onto ``(a, b)`` (rational ends)."""
    a, b = mpq(a), mpq(b)
    return simplify(const(a) + const(b - a) * X1)


@dataclass
class LevelRecord:
    """What one squaring step did on one piece."""

    level: int
    interval: tuple
    end: Optional[int]
    bound: Optional[Interval]
    subdivision: int

    def to_dict(self) -> dict:
        return {"level": self.level, "interval": [str(v) for v in self.interval],
                "squared_at": self.end, "bound": None if self.bound is None else
                [str(self.bound.lo), str(self.bound.hi)], "K": self.subdivision}


def _all_flat(cs: Sequence[Expr], level: int) -> bool:
    return all(certify_norm(c, I_KIND, level, keep_leaves=False, max_depth=24).passed for c in cs)


def _heavy_end(cs: Sequence[Expr], level: int) -> int:
    def weight(x):
        best = mpq(0)
        for c in cs:
            v = coefficient_at(c, level, x)
            if v is None:
                return None
            best = max(best, v.mag())
        return best

    w0, w1 = weight(mpq(1, 64)), weight(mpq(63, 64))
    if w0 is None:
        return 0
    if w1 is None:
        return 1
    return 0 if w0 >= w1 else 1


def _measure(cs: Sequence[Expr], level: int, cap: int):
    """Smallest integer K bounding every norm, with the hull of certified bounds."""
    k, lo, hi = 1, mpq(0), mpq(0)
    for c in cs:
        kc, cert = measure_norm(c, I_KIND, level, cap=cap, keep_leaves=False)
        k = max(k, kc)
        lo = max(lo, max(b.lo for b in cert.bounds.values()))
        hi = max(hi, cert.bound)
    return k, Interval(lo, hi)


def subdivide(tau: Expr, k: int) -> List[Expr]:
    if k == 1:
        return [tau]
    return [simplify(substitute(tau, {1: (X1 + j) * const(mpq(1, k))})) for j in range(k)]


def _square_piece(cs, a, b, level, records, end=None, split_ok=True) -> List[Expr]:
    rho = affine(a, b)
    cr = [reduce_expr(substitute(c, {1: rho})) for c in cs]
    if _all_flat(cr, level):
        records.append(LevelRecord(level, (a, b), None, None, 1))
        return [rho]
    if end is None:
        end = _heavy_end(cr, level)
    psi = X1 * X1 if end == 0 else const(2) * X1 - X1 * X1
    ct = [reduce_expr(substitute(c, {1: psi})) for c in cr]
    cap = growth_cap(level)
    try:
        k, bound = _measure(ct, level, cap)
    except RuntimeError:
        if not split_ok:
            raise GrowthBoundExceeded(f"level {level} on ({a}, {b}): norm above {cap}")
        m = (a + b) / 2
        return (_square_piece(cs, a, m, level, records, 0, False)
                + _square_piece(cs, m, b, level, records, 1, False))
    records.append(LevelRecord(level, (a, b), end, bound, k))
    tau = simplify(substitute(rho, {1: psi}))
    return subdivide(tau, k)


def kill_level(cs: Sequence[Expr], level: int, records: Optional[list] = None,
               square: bool = True) -> List[Expr]:
    """Reparametrizations bringing every ``C^level`` norm to at most one.

    Without ``square`` only the final linear subdivision is applied.
    """
    records = records if records is not None else []
    cs = [reduce_expr(c) for c in cs]
    if not square:
        k, bound = _measure(cs, level, growth_cap(max(level, 1)))
        records.append(LevelRecord(level, (mpq(0), mpq(1)), None, bound, k))
        return subdivide(X1, k)
    if _all_flat(cs, level):
        records.append(LevelRecord(level, (mpq(0), mpq(1)), None, None, 1))
        return [X1]
    cuts = set()
    for c in cs:
        for k in (level, level + 1):
            cuts.update(sign_change_points(lambda x, c=c, k=k: coefficient_at(c, k, x)))
    ends = [mpq(0)] + sorted(cuts) + [mpq(1)]
    out: List[Expr] = []
    for a, b in zip(ends, ends[1:]):
        out += _square_piece(cs, a, b, level, records)
    return out


def reparametrize(comps: Sequence[Expr], r: int, first: int = 1, square_first: bool = False,
                  records: Optional[list] = None) -> List[Expr]:
    """Compose level steps ``first..r``; returns polynomial maps ``sigma`` of ``I``.

    Level one only subdivides unless ``square_first`` is set; every higher
    level squares.  Afterwards ``c o sigma`` has ``C^r`` norm at most one for
    every component.
    """
    sigmas: List[Expr] = [X1]
    for level in range(first, r + 1):
        square = level >= 2 or square_first
        nxt: List[Expr] = []
        for s in sigmas:
            cs = [substitute(c, {1: s}) for c in comps]
            for tau in kill_level(cs, level, records, square):
                nxt.append(simplify(substitute(s, {1: tau})))
        sigmas = nxt
    return sigmas
