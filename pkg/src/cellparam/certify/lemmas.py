"""Diagnostics for the boundedness-of-derivative lemmas.

``large_derivative_measure`` computes the exact measure of the set where a
function's slope exceeds ``M``; ``fiber_derivative_bounded`` decides, along
vertical fibers, whether the derivative in the first variable stays bounded.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from ..algebra.factor import squarefree_factors
from ..algebra.poly import poly_derivative, poly_resultant
from ..algebra.roots import AlgebraicNumber
from ..cad import dedupe_sorted, rational_between, roots_in_unit
from ..jets.expr import Const, Expr
from ..jets.interval import Interval
from ..jets.jet import GuardViolation, jet_eval
from .norms import certify_norm


class HypothesisFail(ValueError):
    pass


@dataclass
class MeasureResult:
    """Exact union of intervals with a rational enclosure of its total length."""

    intervals: List[Tuple[AlgebraicNumber, AlgebraicNumber]]
    enclosure: Interval

    @property
    def exact(self) -> Optional[mpq]:
        return self.enclosure.lo if self.enclosure.lo == self.enclosure.hi else None


def _slope(e: Expr, x) -> Interval:
    return jet_eval(e, [Interval(x)], 1)[(1,)]


def _slope_level_points(p, M, lo, hi) -> List[AlgebraicNumber]:
    px, py = poly_derivative(p, "x"), poly_derivative(p, "y")
    out: List[AlgebraicNumber] = []
    for sgn in (1, -1):
        # y' = -p_x / p_y = sgn * M  <=>  p_x + sgn * M * p_y = 0
        g = px + py * (sgn * M)
        if g.is_zero():
            continue
        res = poly_resultant(p, g, "y") if g.involves("y") else g
        if res.is_zero():
            continue
        for f in squarefree_factors(res.with_vars(("x",))):
            out += [a for a in roots_in_unit(f) if lo < a < hi]
    return out


def large_derivative_measure(f, M, width=mpq(1, 10**22)) -> MeasureResult:
    """Measure of ``{t : |f'(t)| > M}`` for a piecewise algebraic function.

    The set is a finite union of intervals whose endpoints are roots of
    ``f' = +-M`` along the defining curve; each candidate interval is tested at
    a rational interior point.
    """
    M = mpq(M)
    if M <= 0:
        raise ValueError("M must be positive")
    kept: List[Tuple[AlgebraicNumber, AlgebraicNumber]] = []
    for piece in f.pieces:
        if isinstance(piece.expr, Const):
            continue
        p = piece.branch_factor()
        cuts = dedupe_sorted(_slope_level_points(p, M, piece.lo, piece.hi))
        ends = [piece.lo] + cuts + [piece.hi]
        for a, b in zip(ends, ends[1:]):
            d = _slope(piece.expr, rational_between(a, b))
            if d.mig() > M:
                kept.append((a, b))
    lo = hi = mpq(0)
    for a, b in kept:
        alo, ahi = a.interval(width / (2 * len(kept)))
        blo, bhi = b.interval(width / (2 * len(kept)))
        lo += blo - ahi
        hi += bhi - alo
    return MeasureResult(kept, Interval(max(lo, mpq(0)), hi))


@dataclass
class FiberReport:
    """Per-abscissa boundedness of ``dF/dx1`` along the fiber ``{x1} x I``."""

    bounds: Dict[mpq, Optional[Interval]] = field(default_factory=dict)
    exceptional: List[mpq] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.exceptional


_D1 = (1, 0)
_D2 = (0, 1)


def _fiber_bound(F: Expr, x1, depth: int, margin) -> Optional[Interval]:
    """Hull of ``dF/dx1`` enclosures over ``{x1} x [margin, 1 - margin]``, or None."""
    stack = [(Interval(margin, 1 - margin), 0)]
    out = None
    while stack:
        box, d = stack.pop()
        try:
            v = jet_eval(F, [Interval(x1), box], 1)[_D1]
        except (GuardViolation, ZeroDivisionError):
            if d >= depth:
                return None
            a, b = box.bisect()
            stack += [(a, d + 1), (b, d + 1)]
            continue
        out = v if out is None else out.hull(v)
    return out


def _grows_at_ends(F: Expr, x1) -> bool:
    """Probe ``|dF/dx1|`` on approach to the fiber ends; True when it keeps doubling."""
    for side in (0, 1):
        mags = []
        for k in range(8, 41, 8):
            t = mpq(1, 2**k) if side == 0 else 1 - mpq(1, 2**k)
            try:
                mags.append(jet_eval(F, [Interval(x1), Interval(t)], 1)[_D1].mag())
            except (GuardViolation, ZeroDivisionError):
                return True
        if all(b > 2 * a for a, b in zip(mags, mags[1:])) and mags[-1] > 1:
            return True
    return False


def fiber_derivative_bounded(F: Expr, grid: Sequence, depth: int = 16, margin=mpq(1, 2**20),
                             check_hypothesis: bool = True) -> FiberReport:
    """Decide boundedness of ``dF/dx1`` on each fiber ``x1 = g`` for ``g`` in ``grid``.

    Requires ``|dF/dx2| <= 1`` on the square, which is certified first.  A fiber
    is exceptional when the jet cannot be enclosed on some sub-interval even
    after ``depth`` bisections, or when the derivative keeps growing towards a
    fiber end.
    """
    if check_hypothesis:
        cert = certify_norm(F, ("I", "I"), 1, alphas=[_D2], max_depth=84, keep_leaves=False)
        if not cert.passed:
            raise HypothesisFail(f"|dF/dx2| <= 1 not certified ({cert.verdict})")
    report = FiberReport()
    for g in sorted({mpq(v) for v in grid}):
        bound = _fiber_bound(F, g, depth, margin)
        report.bounds[g] = bound
        if bound is None or _grows_at_ends(F, g):
            report.exceptional.append(g)
    return report


__all__ = ["FiberReport", "HypothesisFail", "MeasureResult", "fiber_derivative_bounded",
           "large_derivative_measure"]
