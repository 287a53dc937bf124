"""Cellular r-parametrizations in dimension two.

* :func:`cad2` lists the cells of a cylindrical decomposition of the square.
* :func:`parametrize_set_2d` fills each open 2-cell ``{a(x) < y < b(x)}`` by
  interpolating between its boundary branches after parametrizing the pair
  ``x -> (a(x), b(x))``.
* :func:`family_partition` / :func:`parametrize_family` handle sets depending
  on one parameter.
* :func:`parametrize_function_2d` runs the degree-lexicographic induction for
  a function on the square: find the first unbounded normalized derivative,
  pick a curve where it is large, reparametrize the first variable along that
  curve, repeat.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .algebra.factor import parse_infix, squarefree_factors
from .algebra.poly import Poly, poly_derivative, poly_discriminant, poly_resultant
from .algebra.roots import AlgebraicNumber
from .cad import XY, alg_const, decompose, dedupe_sorted, rational_between, roots_in_unit, simplest_between
from .cells import BasicCell, CellularMap, Parametrization, Piece, compose_cellular
from .certify import certify_norm, measure_norm
from .jets.diff import diff_multi
from .jets.expr import Const, Expr, add, const, has_rootof, mul, simplify, sub, substitute, to_text, var
from .jets.interval import Interval
from .jets.jet import GuardViolation, jet_eval
from .jets.reduce import reduce_expr
from .param1d import (RELATIONS, FunctionPiece, PiecewiseAlgebraicFunction, SemialgebraicSet2D, affine_alg,
                      certify_pieces, parametrize_curve, parametrize_function_1d)
from .reparam import GrowthBoundExceeded, growth_cap, reparametrize

X1, X2 = var(1), var(2)
SQUARE = BasicCell.of("II")
SEGMENT = BasicCell.of("0I")
II = ("I", "I")


class BudgetExceeded(RuntimeError):
    pass


class UnboundedFiberDerivative(ValueError):
    def __init__(self, message: str, exceptional=()):
        super().__init__(message)
        self.exceptional = list(exceptional)


class GammaChoiceFailed(ValueError):
    pass


# decomposition cells

@dataclass
class Cad2Cell:
    """One cell: ``sector`` (open 2-cell), ``section`` (graph), ``segment`` (vertical) or ``point``.

    ``base`` is ``(lo, hi)`` for cells over a strip and ``(x,)`` over a critical
    abscissa.  ``lower``/``upper`` bound sectors and segments; ``branch`` is the
    graph of a section.  Expressions are in ``Var(1)``.
    """

    kind: str
    base: tuple
    lower: Optional[Expr] = None
    upper: Optional[Expr] = None
    branch: Optional[Expr] = None
    sample: tuple = ()

    @property
    def dim(self) -> int:
        return {"sector": 2, "section": 1, "segment": 1, "point": 0}[self.kind]


def cad2(polys: Sequence) -> List[Cad2Cell]:
    """Cells of a decomposition of ``(0,1)^2`` on which every input has constant sign."""
    if not polys:
        raise ValueError("cad2 needs at least one polynomial")
    polys = [parse_infix(p, XY) if isinstance(p, str) else p.with_vars(XY) for p in polys]
    if any(p.is_zero() for p in polys):
        raise ValueError("zero polynomial")
    dec = decompose(polys)
    zero, one = AlgebraicNumber(0), AlgebraicNumber(1)
    cells: List[Cad2Cell] = []
    for strip in dec.strips:
        secs = strip.sections
        base = (strip.lo, strip.hi)
        edges = [None] + list(secs) + [None]
        for lower, upper in zip(edges, edges[1:]):
            lo = lower.sample_y if lower else zero
            hi = upper.sample_y if upper else one
            cells.append(Cad2Cell("sector", base, lower.expr(X1) if lower else const(0),
                                  upper.expr(X1) if upper else const(1),
                                  sample=(strip.sample, rational_between(lo, hi))))
        for s in secs:
            cells.append(Cad2Cell("section", base, branch=s.expr(X1), sample=(strip.sample, s.sample_y)))
    for fib in dec.fibers:
        ends = [zero] + fib.points + [one]
        for lo, hi in zip(ends, ends[1:]):
            cells.append(Cad2Cell("segment", (fib.x,), alg_const(lo), alg_const(hi),
                                  sample=(fib.x, rational_between(lo, hi))))
        for y in fib.points:
            cells.append(Cad2Cell("point", (fib.x,), branch=alg_const(y), sample=(fib.x, y)))
    return cells


# sets

def _interpolate(a: Expr, b: Expr) -> Expr:
    """``x2 * b + (1 - x2) * a``, exact at both ends of the fiber."""
    out = add(mul(X2, b), mul(sub(const(1), X2), a))
    return out if has_rootof(out) else simplify(out)


def _segment(c: Expr, a: Expr, b: Expr) -> CellularMap:
    if isinstance(a, Const) and isinstance(b, Const):
        second = simplify(a + const(b.value - a.value) * X2)
    else:
        second = _interpolate(a, b)
    return CellularMap(SEGMENT, (c, second))


def _measure_all(exprs: Sequence[Expr], kinds, r: int, alphas=None, cap: int = 4096) -> int:
    k = 1
    for e in exprs:
        try:
            kc, _ = measure_norm(e, kinds, r, cap=cap, keep_leaves=False, alphas=alphas)
        except RuntimeError as exc:
            raise GrowthBoundExceeded(f"norm above {cap}: {to_text(e)[:80]}") from exc
        k = max(k, kc)
    return k


def subdivide_pairs(m: CellularMap, extras: Sequence[Expr], k: int, axes: Sequence[int] = (1, 2)):
    """Precompose a map and attached functions with the ``k``-grid contractions along ``axes``."""
    if k == 1:
        return [(m, tuple(extras))]
    out = []
    for shifts in product(range(k), repeat=len(axes)):
        mapping = {i: (var(i) + s) * const(mpq(1, k)) for i, s in zip(axes, shifts)}
        coords = tuple(reduce_expr(substitute(c, mapping)) for c in m.coords)
        out.append((CellularMap(m.cell, coords), tuple(reduce_expr(substitute(e, mapping)) for e in extras)))
    return out


def parametrize_set_2d(X: SemialgebraicSet2D, r: int, certify: bool = True) -> Parametrization:
    """Cellular r-parametrization of any subset of the square given by sign conditions.

    Sets with an equation are one-dimensional and go through
    :func:`~cellparam.param1d.parametrize_curve`.  Otherwise every open 2-cell
    between branches ``a < b`` over a strip is handled by parametrizing
    ``x -> (a(x), b(x))`` and filling ``(phi(x1), x2 * b~ + (1 - x2) * a~)``,
    followed by the linear subdivision that brings the norm to one; vertical
    segments over critical abscissae become ``{c} x I`` cells.
    """
    if X.equations:
        par, _ = parametrize_curve(X, r, certify)
        par.target = "set2d"
        return par
    dec = decompose(X.polys)
    zero, one = AlgebraicNumber(0), AlgebraicNumber(1)
    pieces: List[Piece] = []
    trace: list = []
    for strip in dec.strips:
        edges = [None] + list(strip.sections) + [None]
        for lower, upper in zip(edges, edges[1:]):
            lo = lower.sample_y if lower else zero
            hi = upper.sample_y if upper else one
            if not X.contains((strip.sample, rational_between(lo, hi))):
                continue
            fa = PiecewiseAlgebraicFunction([FunctionPiece(strip.lo, strip.hi, lower.expr(X1) if lower else const(0))])
            fb = PiecewiseAlgebraicFunction([FunctionPiece(strip.lo, strip.hi, upper.expr(X1) if upper else const(1))])
            fpar = parametrize_function_1d([fa, fb], r, certify=False)
            trace += fpar.trace
            for piece in fpar.pieces:
                a, b = piece.pullbacks
                if piece.map.cell.dim == 0:
                    pieces.append(Piece(_segment(piece.map.coords[0], a, b)))
                    continue
                m = CellularMap(SQUARE, (piece.map.coords[0], _interpolate(a, b)))
                k = _measure_all(m.coords, II, r)
                trace.append({"fill": [str(strip.lo), str(strip.hi)], "K": k})
                pieces += [Piece(mm) for mm, _ in subdivide_pairs(m, (), k)]
    for fib in dec.fibers:
        ends = [zero] + fib.points + [one]
        for lo, hi in zip(ends, ends[1:]):
            if X.contains((fib.x, rational_between(lo, hi))):
                pieces.append(Piece(CellularMap(SEGMENT, (alg_const(fib.x), affine_alg(lo, hi, X2)))))
    par = Parametrization(r, pieces, "set2d", trace)
    if certify:
        certify_pieces(par)
    return par


# families over one parameter

@dataclass(frozen=True)
class FamilyProblem:
    """Sign conditions on polynomials in ``(parameter, x, y)``; the parameter ranges over (0,1)."""

    constraints: Tuple[Tuple[Poly, str], ...]
    parameter: str = "l"

    def __post_init__(self):
        names = (self.parameter, "x", "y")
        out = []
        for p, rel in self.constraints:
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
            p = parse_infix(p, names) if isinstance(p, str) else p.with_vars(names)
            if p.is_zero():
                raise ValueError("zero polynomial")
            out.append((p, rel))
        object.__setattr__(self, "constraints", tuple(out))

    @classmethod
    def of(cls, *pairs, parameter: str = "l") -> "FamilyProblem":
        return cls(tuple(pairs), parameter)

    @property
    def names(self) -> Tuple[str, str, str]:
        return (self.parameter, "x", "y")

    def at(self, lam) -> SemialgebraicSet2D:
        lam = mpq(lam)
        return SemialgebraicSet2D(tuple((p.subs({self.parameter: lam}).with_vars(XY), rel)
                                        for p, rel in self.constraints))


def _project(polys: Sequence[Poly], v: str, slopes: bool) -> List[Poly]:
    """Eliminate ``v``: leading coefficients, discriminants, values at 0 and 1, pairwise resultants."""
    out: List[Poly] = []
    curved = []
    for q in polys:
        if q.is_zero() or not q.used_vars():
            continue
        if not q.involves(v):
            out.append(q)
            continue
        curved.append(q)
        out.append(q.leading_coeff(v))
        if q.degree(v) >= 2:
            out.append(poly_discriminant(q, v))
        out.append(q.subs({v: mpq(0)}))
        out.append(q.subs({v: mpq(1)}))
        if slopes:
            other = "y" if v == "x" else "x"
            if q.involves(other):
                h = poly_derivative(q, "x") ** 2 - poly_derivative(q, "y") ** 2
                out.append(poly_resultant(q, h, v) if h.involves(v) else h)
    for i, a in enumerate(curved):
        for b in curved[i + 1:]:
            out.append(poly_resultant(a, b, v))
    return [p for p in out if not p.is_zero() and p.used_vars()]


def _factors(polys: Sequence[Poly], names) -> List[Poly]:
    seen: Dict[Poly, None] = {}
    for p in polys:
        for f in squarefree_factors(p.with_vars(names)):
            if f.used_vars():
                seen.setdefault(f.with_vars(names), None)
    return list(seen)


def family_partition(fam: FamilyProblem):
    """Parameter breakpoints in (0,1) and the open intervals between them.

    The decomposition used by the pipelines (including slope-one abscissae and
    both projection directions) has constant combinatorics on each interval.
    """
    names = fam.names
    lam = fam.parameter
    base = _factors([p for p, _ in fam.constraints], names)
    lam_polys: List[Poly] = []
    for first, second in (("y", "x"), ("x", "y")):
        stage = _factors(_project(base, first, True), names)
        for q in _factors(_project(stage, second, False), names):
            if set(q.used_vars()) == {lam}:
                lam_polys.append(q)
    points: List[AlgebraicNumber] = []
    for q in lam_polys:
        for f in squarefree_factors(q.with_vars((lam,))):
            points += roots_in_unit(f)
    points = dedupe_sorted(points)
    ends = [AlgebraicNumber(0)] + points + [AlgebraicNumber(1)]
    return list(zip(ends, ends[1:])), points


def parametrize_family(fam: FamilyProblem, r: int, lam0, certify: bool = True) -> Parametrization:
    """Parametrize the member at ``lam0`` and record which parameter piece it lies in."""
    lam0 = mpq(lam0)
    if not 0 < lam0 < 1:
        raise ValueError("parameter must lie in (0, 1)")
    intervals, points = family_partition(fam)
    where = next(([str(p)] for p in points if p == lam0), None)
    if where is None:
        where = next([str(a), str(b)] for a, b in intervals if a < lam0 < b)
    par = parametrize_set_2d(fam.at(lam0), r, certify)
    par.target = "family"
    par.trace.append({"parameter": str(lam0), "piece": where})
    return par


# functions on the square

def deglex(r: int) -> List[Tuple[int, int]]:
    """Multi-indices of total degree at most ``r``, degree first, then lexicographic."""
    return sorted(((i, d - i) for d in range(r + 1) for i in range(d + 1)), key=lambda a: (sum(a), a))


def _key(a) -> Tuple[int, Tuple[int, int]]:
    return (sum(a), tuple(a))


_FIBER_GRID = sorted({mpq(j, 256) for j in range(1, 256)} | {mpq(1, 2**k) for k in range(9, 31)}
                     | {1 - mpq(1, 2**k) for k in range(9, 31)})
_GAMMA_SAMPLES = [mpq(k, 8) for k in range(1, 8)]


def _coef(G: Expr, alpha, x1, x2) -> Optional[float]:
    try:
        v = jet_eval(G, [Interval(x1), Interval(x2)], sum(alpha))[tuple(alpha)]
    except (GuardViolation, ZeroDivisionError):
        return None
    return float(v.mid())


def _least_admissible(G: Expr, alpha, x1) -> Optional[mpq]:
    """Least ``x2`` with ``|G^(alpha)(x1, x2)| >= sup / 2`` on the fiber, or None if the whole fiber qualifies."""
    vals = [(x2, _coef(G, alpha, x1, x2)) for x2 in _FIBER_GRID]
    vals = [(x2, abs(v)) for x2, v in vals if v is not None]
    if not vals:
        raise UnboundedFiberDerivative(f"no enclosure on the fiber x1 = {x1}", [x1])
    sup = max(v for _, v in vals)
    half = sup / 2
    if all(v >= half * (1 - 1e-12) for _, v in vals):
        return None
    prev = mpq(0)
    for x2, v in vals:
        if v >= half:
            a, b = prev, x2
            for _ in range(48):
                m = (a + b) / 2
                mv = _coef(G, alpha, x1, m)
                if mv is not None and abs(mv) >= half:
                    b = m
                else:
                    a = m
            return b
        prev = x2
    return None


def choose_gamma(G: Expr, alpha: Tuple[int, int]) -> Tuple[Expr, dict]:
    """Curve ``x1 -> (x1, gamma2(x1))`` on which ``|G^(alpha)|`` is at least half its fiber sup.

    The least admissible fiber coordinate is located on sample fibers; when it
    agrees across samples it is recognized as the simplest nearby rational.
    Full fibers fall back to the midpoint.  A constant choice that is not
    admissible on every sample raises :class:`GammaChoiceFailed`.
    """
    if alpha[0] < 1:
        raise ValueError("the index must differentiate in the first variable")
    least = [_least_admissible(G, alpha, x1) for x1 in _GAMMA_SAMPLES]
    found = [v for v in least if v is not None]
    if not found:
        return const(mpq(1, 2)), {"rule": "midpoint", "gamma2": "1/2"}
    lo, hi = min(found), max(found)
    tol = mpq(1, 2**30)
    c = simplest_between(lo - tol, hi + tol) if hi - lo < tol else simplest_between(hi, hi + mpq(1, 2**20))
    for x1 in _GAMMA_SAMPLES:
        vals = [abs(v) for v in (_coef(G, alpha, x1, x2) for x2 in _FIBER_GRID) if v is not None]
        at = _coef(G, alpha, x1, c)
        if at is None or abs(at) < max(vals) / 2 * (1 - 1e-9):
            raise GammaChoiceFailed(f"constant gamma2 = {c} is not admissible at x1 = {x1}")
    return const(c), {"rule": "least", "gamma2": str(c)}


def _first_refuted(G: Expr, r: int, max_depth: int):
    for a in deglex(r):
        cert = certify_norm(G, II, r, max_depth=max_depth, keep_leaves=False, alphas=[a])
        if not cert.passed:
            return a, cert
    return None


def _squaring_name(records) -> Optional[str]:
    for rec in records:
        if rec.level == 1 and rec.end is not None:
            return "x -> x^2" if rec.end == 0 else "x -> 1-(1-x)^2"
    return None


def parametrize_function_2d(F: Expr, r: int, certify: bool = True, max_depth: int = 40,
                            max_rounds: Optional[int] = None) -> Parametrization:
    """Cellular r-parametrization of ``F: I^2 -> I`` with certified pullbacks.

    Each round finds the first multi-index (degree-lexicographic) whose
    normalized derivative is not certified at most one.  Pure fiber indices are
    fixed by subdividing the second variable.  Otherwise a curve
    ``(x1, gamma2)`` where that derivative is large is chosen, the pair
    ``(x1, D^(alpha - e1) F (x1, gamma2))`` is parametrized in one variable,
    the result is precomposed in the first variable, and the indices up to
    ``alpha`` are brought to one by a linear subdivision.  The refuted index
    strictly increases along every branch of the run.
    """
    rounds = max_rounds or len(deglex(r)) + 1
    work = [(CellularMap.identity(SQUARE), reduce_expr(F), None, 0)]
    done: List[Piece] = []
    trace: list = []
    while work:
        m, G, last, depth = work.pop()
        hit = _first_refuted(G, r, max_depth)
        if hit is None:
            done.append(Piece(m, (G,)))
            continue
        alpha, cert = hit
        if (last is not None and _key(alpha) <= _key(last)) or depth >= rounds:
            raise BudgetExceeded(f"refuted index {alpha} does not advance past {last}")
        upto = [b for b in deglex(r) if _key(b) <= _key(alpha)]
        step = {"alpha": list(alpha), "verdict": cert.verdict}
        if alpha[0] == 0:
            k = _measure_all([G], II, r, alphas=[b for b in upto if b[0] == 0], cap=growth_cap(r))
            step["fiber_subdivision"] = k
            trace.append(step)
            for mm, (gg,) in subdivide_pairs(m, (G,), k, axes=(2,)):
                work.append((mm, gg, alpha, depth + 1))
            continue
        gamma2, info = choose_gamma(G, alpha)
        beta = (alpha[0] - 1, alpha[1])
        H = reduce_expr(substitute(diff_multi(G, beta), {2: gamma2}))
        records: list = []
        sigmas = reparametrize([X1, H], r, square_first=True, records=records)
        step.update(info)
        step["reparametrization"] = _squaring_name(records)
        step["levels"] = [rec.to_dict() for rec in records]
        step["K"] = max([rec.subdivision for rec in records if rec.level == 1] or [1])
        step["pieces"] = []
        for s in sigmas:
            inner = CellularMap(SQUARE, (s, X2))
            m2 = compose_cellular(m, inner, check=False)
            m2 = CellularMap(SQUARE, tuple(reduce_expr(c) for c in m2.coords))
            G2 = reduce_expr(substitute(G, {1: s}))
            k = _measure_all([*m2.coords, G2], II, r, alphas=upto, cap=growth_cap(r))
            step["pieces"].append({"sigma": to_text(s), "pullback": to_text(G2), "K": k})
            for mm, (gg,) in subdivide_pairs(m2, (G2,), k):
                work.append((mm, gg, alpha, depth + 1))
        trace.append(step)
    par = Parametrization(r, done, "fn2d", trace)
    if certify:
        certify_pieces(par, max_depth=max_depth)
    return par


__all__ = [
    "BudgetExceeded", "Cad2Cell", "FamilyProblem", "GammaChoiceFailed", "UnboundedFiberDerivative", "cad2",
    "choose_gamma", "deglex", "family_partition", "parametrize_family", "parametrize_function_2d",
    "parametrize_set_2d", "subdivide_pairs",
]
