"""Cellular r-parametrizations in dimension one: planar curves and univariate functions.

The x-axis is cut at the critical abscissae of a cylindrical decomposition,
including the abscissae where some branch has slope of absolute value one.
Over each strip a branch is either flat (|f'| <= 1), in which case the strip
itself is the parameter, or steep, in which case the branch is parametrized by
its ordinate through the inverse branch ``x = g(y)``.  Higher derivatives are
then brought under control level by level with :mod:`cellparam.reparam`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

from gmpy2 import mpq

from .algebra.factor import parse_infix, squarefree_factors
from .algebra.poly import Poly, poly_derivative, poly_resultant
from .algebra.roots import AlgebraicNumber, sign_at
from .cad import (UNIT, XY, Section, Strip, alg_const, decompose, dedupe_sorted, fiber_points, in_set,
                  irreducible_factors, rational_between, roots_in_unit, swap_xy, y_critical_points)
from .cells import BasicCell, CellularMap, Parametrization, Piece
from .certify import certify_norm
from .jets.diff import poly_at
from .jets.expr import Const, Expr, RootOf, const, from_poly, mul, simplify, sub, substitute, to_poly, var
from .jets.interval import Interval
from .jets.jet import GuardViolation, enclose
from .jets.reduce import reduce_expr
from .reparam import coefficient_at, kill_level, reparametrize, sign_change_points

X1, X2 = var(1), var(2)
LINE = BasicCell.of("I")
POINT = BasicCell.of("0")
CURVE_CELL = BasicCell.of("I0")
VERTICAL_CELL = BasicCell.of("0I")
POINT_CELL = BasicCell.of("00")
RELATIONS = {"=0": 0, "<0": -1, ">0": 1}


class DimensionTooHigh(ValueError):
    pass


class PreconditionFail(ValueError):
    pass


class DegenerateInput(ValueError):
    """A derivative vanishes identically on a piece (the piece is already flat)."""

    def __init__(self, message: str, piece=None):
        super().__init__(message)
        self.piece = piece


# input types

@dataclass(frozen=True)
class SemialgebraicSet2D:
    """Conjunction of sign conditions ``p = 0``, ``p < 0``, ``p > 0`` inside the open square."""

    constraints: Tuple[Tuple[Poly, str], ...]

    def __post_init__(self):
        out = []
        for p, rel in self.constraints:
            if rel not in RELATIONS:
                raise ValueError(f"unknown relation {rel!r}")
            p = parse_infix(p, XY) if isinstance(p, str) else p.with_vars(XY)
            if p.is_zero():
                raise ValueError("constraint polynomial is zero")
            out.append((p, rel))
        object.__setattr__(self, "constraints", tuple(out))

    @classmethod
    def of(cls, *pairs) -> "SemialgebraicSet2D":
        return cls(tuple(pairs))

    @property
    def equations(self) -> List[Poly]:
        return [p for p, rel in self.constraints if rel == "=0"]

    @property
    def polys(self) -> List[Poly]:
        return [p for p, _ in self.constraints]

    def contains(self, point) -> bool:
        return all(0 < v < 1 for v in point) and in_set(self.constraints, point)

    def dimension_bound(self) -> int:
        return 1 if self.equations else 2


@dataclass(frozen=True)
class FunctionPiece:
    """``expr`` (in ``Var(1)``) on the open interval ``(lo, hi)``."""

    lo: AlgebraicNumber
    hi: AlgebraicNumber
    expr: Expr

    def relation(self) -> Poly:
        """A polynomial ``p(x, y)`` vanishing on the graph."""
        p = to_poly(self.expr, 1)
        if p is not None:
            return Poly.var("y", XY) - p.rename({"x1": "x"}).with_vars(XY)
        e = self.expr
        if isinstance(e, RootOf) and e.args == (X1,):
            return e.poly.rename(dict(zip(e.poly.vars, XY))).with_vars(XY)
        raise ValueError("piece is neither a polynomial nor a branch in the first variable")

    def branch_factor(self) -> Poly:
        """The irreducible factor of :meth:`relation` carrying the graph."""
        factors = [f for f in squarefree_factors(self.relation()) if f.involves("y")]
        if len(factors) == 1:
            return factors[0]
        x = rational_between(self.lo, self.hi)
        y = enclose(self.expr, [Interval(x)])
        hits = [f for f in factors if _contains_zero(f.evaluate({"x": Interval(x), "y": y}))]
        if len(hits) != 1:
            raise ValueError("cannot identify the factor carrying the branch")
        return hits[0]

    def contains(self, x) -> bool:
        return self.lo < x < self.hi


def _contains_zero(v) -> bool:
    return v.contains_zero() if isinstance(v, Interval) else v == 0


def _alg(v) -> AlgebraicNumber:
    return v if isinstance(v, AlgebraicNumber) else AlgebraicNumber(v)


@dataclass
class PiecewiseAlgebraicFunction:
    pieces: List[FunctionPiece] = field(default_factory=list)

    @classmethod
    def polynomial(cls, p: Union[Poly, str], lo=0, hi=1) -> "PiecewiseAlgebraicFunction":
        p = parse_infix(p, ["x1"]) if isinstance(p, str) else p
        return cls([FunctionPiece(_alg(lo), _alg(hi), simplify(from_poly(p)))])

    @classmethod
    def branch(cls, p: Union[Poly, str], index: int = 0, lo=0, hi=1, window=UNIT,
               count: Optional[int] = None) -> "PiecewiseAlgebraicFunction":
        """The ``index``-th root in ``window`` of ``p(x, .)`` over ``(lo, hi)``."""
        p = parse_infix(p, XY) if isinstance(p, str) else p.with_vars(XY)
        node = RootOf(p, (X1,), index, (mpq(window[0]), mpq(window[1])), count)
        return cls([FunctionPiece(_alg(lo), _alg(hi), node)])

    def piece_at(self, x) -> Optional[FunctionPiece]:
        for p in self.pieces:
            if p.contains(x):
                return p
        return None

    def breakpoints(self) -> List[AlgebraicNumber]:
        return dedupe_sorted([v for p in self.pieces for v in (p.lo, p.hi) if 0 < v < 1])


# exact monotonicity partition

def derivative_numerators(p: Poly, s: int) -> List[Tuple[Poly, int]]:
    """``[(N_k, m_k)]`` for ``k = 1..s`` with ``y^(k) = N_k / p_y^(m_k)`` on ``p(x, y) = 0``."""
    px, py = poly_derivative(p, "x"), poly_derivative(p, "y")
    pxy, pyy = poly_derivative(px, "y"), poly_derivative(py, "y")
    n, m = -px, 1
    out = [(n, m)]
    for _ in range(1, s):
        dn = poly_derivative(n, "x") * py - poly_derivative(n, "y") * px
        n = dn * py - n * m * (py * pxy - px * pyy)
        m += 2
        out.append((n, m))
    return out


def _eliminate(p: Poly, n: Poly) -> Poly:
    if n.is_zero():
        return n.with_vars(("x",))
    if not n.involves("y"):
        return n.with_vars(("x",))
    return poly_resultant(p, n, "y").with_vars(("x",))


def monotone_partition(f: PiecewiseAlgebraicFunction, s: int):
    """Open intervals on which ``f^(s)`` has constant sign and is monotone, plus endpoints.

    Split points are the roots of ``res_y(p, N_s) * res_y(p, N_(s+1))`` where
    ``N_k`` are the implicit-differentiation numerators; this superset of the
    true zeros is certified by exact root isolation.
    """
    intervals: List[Tuple[AlgebraicNumber, AlgebraicNumber]] = []
    points: List[AlgebraicNumber] = []
    for piece in f.pieces:
        p = piece.branch_factor()
        nums = derivative_numerators(p, s + 1)
        cuts: List[AlgebraicNumber] = []
        for k, (n, _) in enumerate(nums[s - 1:]):
            res = _eliminate(p, n)
            if res.is_zero():
                if k == 0:
                    raise DegenerateInput(f"derivative of order {s} vanishes identically", piece)
                continue
            for g in squarefree_factors(res):
                cuts += [a for a in roots_in_unit(g) if piece.lo < a < piece.hi]
        ends = [piece.lo] + dedupe_sorted(cuts) + [piece.hi]
        intervals += list(zip(ends, ends[1:]))
        points += ends
    return intervals, dedupe_sorted(points)


# charts over strips

Comp = Union[Section, AlgebraicNumber]


@dataclass
class Chart:
    """An increasing chart ``tau: I -> (lo, hi)`` with the components pulled back."""

    lo: AlgebraicNumber
    hi: AlgebraicNumber
    tau: Expr
    comps: List[Expr]
    inverse_of: Optional[int] = None


def affine_alg(a: AlgebraicNumber, b: AlgebraicNumber, v: Expr = X1) -> Expr:
    """Affine map of ``I`` onto ``(a, b)`` (or its reverse) with algebraic ends."""
    a, b = _alg(a), _alg(b)
    if a.is_rational and b.is_rational:
        return simplify(const(a.value) + const(b.value - a.value) * v)
    A, B = alg_const(a), alg_const(b)
    # anchor at the rational end so its value is reproduced exactly there
    if b.is_rational:
        return B - (B - A) * simplify(const(1) - v)
    return A + (B - A) * v


def comp_expr(c: Comp) -> Expr:
    return c.expr(X1) if isinstance(c, Section) else alg_const(c)


def is_steep(sec: Section, sample) -> bool:
    q = sec.poly
    qx, qy = poly_derivative(q, "x"), poly_derivative(q, "y")
    return sign_at(qx * qx - qy * qy, {"x": sample, "y": sec.sample_y}) > 0


def _toward(x: AlgebraicNumber, towards: AlgebraicNumber, k: int) -> mpq:
    lo, hi = x.interval(mpq(1, 2 ** (k + 20)))
    tlo, thi = towards.interval(mpq(1, 2 ** 40))
    base = hi if towards > x else lo
    other = tlo if towards > x else thi
    return base + (other - base) / 2 ** k


def section_value(e: Expr, q: Poly, x: AlgebraicNumber, towards: AlgebraicNumber) -> AlgebraicNumber:
    """Value, or one-sided limit from the side of ``towards``, of a branch of ``q`` at ``x``.

    The limit is one of the finitely many points of ``q = 0`` on the line
    ``x = const`` or an end of the unit window; the candidate nearest to the
    branch value at a nearby probe is taken.
    """
    cands = fiber_points([q], x)[0] + [AlgebraicNumber(0), AlgebraicNumber(1)]
    best = None
    for k in (40, 80):
        try:
            y = enclose(e, [Interval(_toward(x, towards, k))])
        except (GuardViolation, ZeroDivisionError):
            continue
        m = y.mid()
        best = min(cands, key=lambda c: abs(c.approx() - m))
    if best is None:
        raise GuardViolation(f"branch undefined near {float(x)}")
    return best


def comp_value(c: Comp, x: AlgebraicNumber, towards: AlgebraicNumber) -> AlgebraicNumber:
    if isinstance(c, Section):
        return section_value(c.expr(X1), c.poly, x, towards)
    return c


def inverse_branch(sec: Section, a: AlgebraicNumber, b: AlgebraicNumber, y0, y1) -> Expr:
    """``RootOf`` for ``x = g(y)`` inverting the section over ``(a, b)``; argument ``Var(1)``."""
    lo, hi = (y0, y1) if y0 < y1 else (y1, y0)
    ys = rational_between(lo, hi)
    xs = roots_in_unit(sec.poly.subs({"y": ys}).with_vars(("x",)))
    e = sec.expr(X1)
    for k, x in enumerate(xs):
        if not a < x < b:
            continue
        xl, xh = x.interval(mpq(1, 2 ** 90))
        try:
            v = enclose(e, [Interval(xl, xh)])
        except (GuardViolation, ZeroDivisionError):
            continue
        if v.contains(ys):
            return RootOf(swap_xy(sec.poly), (X1,), k, UNIT, len(xs))
    raise GuardViolation("inverse branch not found")


def _slope(e: Expr, x) -> Optional[Interval]:
    return coefficient_at(e, 1, x)


def _dominance_cuts(exprs: Sequence[Expr], steep: Sequence[int], a: AlgebraicNumber,
                    b: AlgebraicNumber) -> List[mpq]:
    lo = a.interval(mpq(1, 2 ** 80))[1]
    hi = b.interval(mpq(1, 2 ** 80))[0]
    cuts = set()
    for n, i in enumerate(steep):
        for j in steep[n + 1:]:
            def gap(x, i=i, j=j):
                di, dj = _slope(exprs[i], x), _slope(exprs[j], x)
                if di is None or dj is None:
                    return None
                return di * di - dj * dj
            cuts.update(p for p in sign_change_points(gap, lo, hi) if lo < p < hi)
    return sorted(cuts)


def _conjugate(sec: Section, other: Comp, tau: Expr, v: Expr) -> Optional[Expr]:
    """The other root of a quadratic in ``y`` with constant leading coefficient, as ``-c1(x)/c2 - v``.

    Avoids enclosing a root next to the fold where both roots of the same
    polynomial merge.
    """
    if not isinstance(other, Section) or other.poly != sec.poly or sec.poly.degree("y") != 2:
        return None
    c0, c1, c2 = sec.poly.coeffs_in("y")
    if not c2.is_constant():
        return None
    lin = poly_at(c1.with_vars(("x",)), [tau]) if c1.involves("x") else const(c1.constant_value())
    return reduce_expr(sub(mul(const(-1 / c2.constant_value()), lin), v))


def strip_charts(strip: Strip, comps: Sequence[Comp]) -> Tuple[List[Chart], List[AlgebraicNumber]]:
    """Charts over ``strip`` on which every component has slope at most one.

    Returns the charts and the interior cut points they leave uncovered.
    """
    exprs = [comp_expr(c) for c in comps]
    steep = [i for i, c in enumerate(comps) if isinstance(c, Section) and is_steep(c, strip.sample)]
    if not steep:
        tau = affine_alg(strip.lo, strip.hi)
        return [Chart(strip.lo, strip.hi, tau, [reduce_expr(substitute(e, {1: tau})) for e in exprs])], []
    cuts = [AlgebraicNumber(p) for p in _dominance_cuts(exprs, steep, strip.lo, strip.hi)] if len(steep) > 1 else []
    ends = [strip.lo] + cuts + [strip.hi]
    charts = []
    for a, b in zip(ends, ends[1:]):
        mid = rational_between(a, b)
        j = max(steep, key=lambda i: (_slope(exprs[i], mid) or Interval(0)).mag())
        sec = comps[j]
        y0, y1 = comp_value(sec, a, b), comp_value(sec, b, a)
        v = affine_alg(y0, y1)
        tau = substitute(inverse_branch(sec, a, b, y0, y1), {1: v})
        pulled = [v if i == j else _conjugate(sec, comps[i], tau, v) or reduce_expr(substitute(e, {1: tau}))
                  for i, e in enumerate(exprs)]
        charts.append(Chart(a, b, tau, pulled, j))
    return charts, cuts


def _assemble(chart: Chart, sigmas: Sequence[Expr]):
    for s in sigmas:
        yield (reduce_expr(substitute(chart.tau, {1: s})),
               [reduce_expr(substitute(c, {1: s})) for c in chart.comps])


def certify_pieces(par: Parametrization, max_depth: int = 40) -> Parametrization:
    """Attach norm certificates for every map coordinate and pullback."""
    for piece in par.pieces:
        kinds = piece.map.cell.kinds
        piece.certificates = [certify_norm(e, kinds, par.r, max_depth=max_depth, keep_leaves=False)
                              for e in (*piece.map.coords, *piece.pullbacks)]
    return par


# curves

def parametrize_curve(X: SemialgebraicSet2D, r: int, certify: bool = True):
    """Cellular r-parametrization of a set of dimension at most one, with its point set.

    Returns ``(parametrization, sigma)``.  Branch pieces live on the cell
    ``I x {0}`` with both coordinates depending on the first variable; vertical
    segments on ``{0} x I``; the exceptional points ``sigma`` are emitted as
    zero-dimensional cells so that the images cover the whole set.
    """
    if X.dimension_bound() > 1:
        raise DimensionTooHigh("the set has no equation; its dimension may be 2")
    eqf = irreducible_factors(X.equations)
    curved = [q for q in eqf if q.involves("x") and q.involves("y")]
    dec = decompose(X.polys, flat=True, extra_points=y_critical_points(curved))
    pieces: List[Piece] = []
    records: list = []
    for strip in dec.strips:
        for sec in strip.sections:
            if sec.poly not in eqf or not X.contains((strip.sample, sec.sample_y)):
                continue
            charts, _ = strip_charts(strip, [sec])
            for ch in charts:
                sigmas = reparametrize([ch.tau, ch.comps[0]], r, records=records)
                for x, (y,) in _assemble(ch, sigmas):
                    pieces.append(Piece(CellularMap(CURVE_CELL, (x, y))))
    sigma: List[Tuple[AlgebraicNumber, AlgebraicNumber]] = []
    for fib in dec.fibers:
        c = fib.x
        vertical = any(not q.involves("y") and sign_at(q.with_vars(("x",)), [c]) == 0 for q in eqf)
        if vertical:
            ends = [AlgebraicNumber(0)] + fib.points + [AlgebraicNumber(1)]
            for a, b in zip(ends, ends[1:]):
                if X.contains((c, rational_between(a, b))):
                    pieces.append(Piece(CellularMap(VERTICAL_CELL, (alg_const(c), affine_alg(a, b, X2)))))
            cands = fib.points
        else:
            cands = fiber_points(eqf, c)[0]
        for y in cands:
            if X.contains((c, y)):
                sigma.append((c, y))
                pieces.append(Piece(CellularMap(POINT_CELL, (alg_const(c), alg_const(y)))))
    par = Parametrization(r, pieces, "set1d", [rec.to_dict() for rec in records])
    if certify:
        certify_pieces(par)
    return par, sigma


# functions

def _match_section(piece: FunctionPiece, strip: Strip) -> Comp:
    if isinstance(piece.expr, Const):
        return AlgebraicNumber(piece.expr.value)
    y = enclose(piece.expr, [Interval(strip.sample)])
    factor = piece.branch_factor()
    for sec in strip.sections:
        if sec.poly != factor:
            continue
        lo, hi = sec.sample_y.interval(mpq(1, 2 ** 80))
        if lo <= y.hi and y.lo <= hi:
            return sec
    raise GuardViolation(f"no section matches the branch at x = {strip.sample}")


def parametrize_function_1d(F, r: int, certify: bool = True) -> Parametrization:
    """Cellular r-parametrization of ``x -> (f_1(x), ..., f_q(x))`` with certified pullbacks.

    ``F`` is a PiecewiseAlgebraicFunction or a sequence of them.  Every
    component is handled jointly: where some component is steep the chart
    follows the steepest one through its inverse branch, so all pullbacks have
    slope at most one before the derivative-killing levels run.  Breakpoints
    and critical abscissae inside the domain become zero-dimensional cells.
    """
    fs = [F] if isinstance(F, PiecewiseAlgebraicFunction) else list(F)
    factors: List[Poly] = []
    for f in fs:
        for p in f.pieces:
            if not isinstance(p.expr, Const):
                bf = p.branch_factor()
                if bf not in factors:
                    factors.append(bf)
    bps = dedupe_sorted([b for f in fs for b in f.breakpoints()])
    curved = [q for q in factors if q.involves("x")]
    dec = decompose(factors, flat=True, extra_points=bps + y_critical_points(curved))
    pieces: List[Piece] = []
    records: list = []
    points: List[AlgebraicNumber] = []
    for strip in dec.strips:
        fps = [f.piece_at(strip.sample) for f in fs]
        if any(p is None for p in fps):
            continue
        comps = [_match_section(p, strip) for p in fps]
        charts, cuts = strip_charts(strip, comps)
        points += [(c, comps, strip.lo) for c in cuts]
        for ch in charts:
            sigmas = reparametrize([ch.tau, *ch.comps], r, records=records)
            for x, ys in _assemble(ch, sigmas):
                pieces.append(Piece(CellularMap(LINE, (x,)), tuple(ys)))
    singles: Dict[AlgebraicNumber, list] = {}
    for c in dec.critical:
        fps = [f.piece_at(c) for f in fs]
        if any(p is None for p in fps):
            continue
        vals = []
        for p in fps:
            if isinstance(p.expr, Const):
                vals.append(AlgebraicNumber(p.expr.value))
            else:
                other = p.lo if p.lo < c else p.hi
                vals.append(section_value(p.expr, p.branch_factor(), c, _mid(c, other)))
        singles[c] = vals
    for c, comps, left in points:
        singles[c] = [comp_value(comp, c, left) for comp in comps]
    for c in sorted(singles):
        pieces.append(Piece(CellularMap(POINT, (alg_const(c),)), tuple(alg_const(v) for v in singles[c])))
    par = Parametrization(r, pieces, "fn1d", [rec.to_dict() for rec in records])
    if certify:
        certify_pieces(par)
    return par


def _mid(a: AlgebraicNumber, b: AlgebraicNumber) -> AlgebraicNumber:
    lo, hi = (a, b) if a < b else (b, a)
    return AlgebraicNumber(rational_between(lo, hi))


def kill_derivative(f: PiecewiseAlgebraicFunction, r: int, certify: bool = True) -> Parametrization:
    """One derivative-killing level at order ``r`` for a function with ``C^(r-1)`` norm at most one."""
    if r < 2:
        raise ValueError("derivative killing needs r >= 2")
    pieces: List[Piece] = []
    records: list = []
    for fp in f.pieces:
        u = affine_alg(fp.lo, fp.hi)
        g = reduce_expr(substitute(fp.expr, {1: u}))
        pre = certify_norm(g, ("I",), r - 1, keep_leaves=False)
        if not pre.passed:
            raise PreconditionFail(f"C^{r - 1} norm of the piece on ({float(fp.lo):.6g}, {float(fp.hi):.6g}) "
                                   f"is not certified <= 1 ({pre.verdict})")
        for tau in kill_level([u, g], r, records):
            pieces.append(Piece(CellularMap(LINE, (reduce_expr(substitute(u, {1: tau})),)),
                                (reduce_expr(substitute(g, {1: tau})),)))
    par = Parametrization(r, pieces, "fn1d", [rec.to_dict() for rec in records])
    if certify:
        certify_pieces(par)
    return par
