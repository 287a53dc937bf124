"""Truncated Taylor arithmetic with interval coefficients.

A :class:`JetEnclosure` over a box stores, for every multi-index ``alpha`` with
``|alpha| <= r``, an interval containing ``D^alpha f(x) / alpha!`` for every
``x`` in the box.  Arithmetic acts pointwise on Taylor coefficients, so
evaluating an expression on variable jets seeded as ``(box, 1, 0, ...)``
yields such an enclosure.
"""

from __future__ import annotations

import math

from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from ..algebra.poly import Poly
from ..algebra.roots import isolate_real_roots, refine_root
from .expr import Add, Const, Expr, Mul, Pow, RootOf, Sub, Var, nodes
from .interval import Interval

MAX_ORDER = 8


class GuardViolation(ArithmeticError):
    """A RootOf branch could not be certified smooth/isolated over the box."""

    def __init__(self, message: str, box=None):
        super().__init__(message)
        self.box = box


class OrderTooLarge(ValueError):
    pass


@lru_cache(maxsize=None)
def multi_indices(n: int, r: int) -> Tuple[Tuple[int, ...], ...]:
    """All alpha in N^n with |alpha| <= r in degree-lexicographic order."""
    out = []

    def rec(prefix, left, k):
        if k == 0:
            if left == 0:
                out.append(tuple(prefix))
            return
        for e in range(left, -1, -1):
            rec(prefix + [e], left - e, k - 1)

    for d in range(r + 1):
        start = len(out)
        rec([], d, n)
        out[start:] = sorted(out[start:])
    return tuple(out)


@lru_cache(maxsize=None)
def _tables(n: int, r: int):
    idx = multi_indices(n, r)
    pos = {a: i for i, a in enumerate(idx)}
    pairs: List[List[Tuple[int, int]]] = [[] for _ in idx]
    for i, a in enumerate(idx):
        for j, b in enumerate(idx):
            s = tuple(x + y for x, y in zip(a, b))
            if sum(s) <= r:
                pairs[pos[s]].append((i, j))
    degree = [sum(a) for a in idx]
    return idx, pos, pairs, degree


class JetEnclosure:
    """Interval Taylor coefficients up to total order ``r`` in ``n`` variables.

    ``coeffs[k]`` is None for a coefficient known to vanish identically.
    """

    __slots__ = ("n", "r", "coeffs", "box")

    def __init__(self, n: int, r: int, coeffs: List[Optional[Interval]], box=None):
        self.n, self.r, self.coeffs, self.box = n, r, coeffs, box

    # constructors
    @classmethod
    def constant(cls, value, n: int, r: int, box=None) -> "JetEnclosure":
        size = len(multi_indices(n, r))
        c: List[Optional[Interval]] = [None] * size
        value = Interval.coerce(value)
        if value.lo or value.hi:
            c[0] = value
        return cls(n, r, c, box)

    @classmethod
    def variable(cls, i: int, box: Sequence[Interval], r: int) -> "JetEnclosure":
        n = len(box)
        jet = cls.constant(box[i - 1], n, r, box)
        if r >= 1:
            _, pos, _, _ = _tables(n, r)
            e = tuple(1 if k == i - 1 else 0 for k in range(n))
            jet.coeffs[pos[e]] = Interval(1)
        return jet

    # access
    def __getitem__(self, alpha) -> Interval:
        _, pos, _, _ = _tables(self.n, self.r)
        c = self.coeffs[pos[tuple(alpha)]]
        return c if c is not None else Interval(0)

    def items(self):
        idx = multi_indices(self.n, self.r)
        for a, c in zip(idx, self.coeffs):
            yield a, (c if c is not None else Interval(0))

    @property
    def value(self) -> Interval:
        return self[(0,) * self.n]

    def norm_bound(self):
        """Upper bound of max |coefficient| over all alpha."""
        return max((c.mag() for c in self.coeffs if c is not None), default=mpq(0))

    # arithmetic
    def _same(self, other: "JetEnclosure"):
        if (self.n, self.r) != (other.n, other.r):
            raise ValueError("incompatible jets")

    def __add__(self, other) -> "JetEnclosure":
        if not isinstance(other, JetEnclosure):
            return self + JetEnclosure.constant(other, self.n, self.r, self.box)
        self._same(other)
        out = []
        for a, b in zip(self.coeffs, other.coeffs):
            out.append(a if b is None else b if a is None else a + b)
        return JetEnclosure(self.n, self.r, out, self.box)

    __radd__ = __add__

    def __neg__(self) -> "JetEnclosure":
        return JetEnclosure(self.n, self.r, [None if c is None else -c for c in self.coeffs], self.box)

    def __sub__(self, other) -> "JetEnclosure":
        return self + (-other if isinstance(other, JetEnclosure) else Interval.coerce(other) * -1)

    def scale(self, c) -> "JetEnclosure":
        return JetEnclosure(self.n, self.r, [None if v is None else v * c for v in self.coeffs], self.box)

    def __mul__(self, other) -> "JetEnclosure":
        if not isinstance(other, JetEnclosure):
            return self.scale(other)
        self._same(other)
        _, _, pairs, _ = _tables(self.n, self.r)
        a, b = self.coeffs, other.coeffs
        out: List[Optional[Interval]] = []
        for plist in pairs:
            acc = None
            for i, j in plist:
                x, y = a[i], b[j]
                if x is None or y is None:
                    continue
                t = x * y
                acc = t if acc is None else acc + t
            out.append(acc)
        return JetEnclosure(self.n, self.r, out, self.box)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "JetEnclosure":
        if k == 0:
            return JetEnclosure.constant(1, self.n, self.r, self.box)
        result = None
        base = self
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def power(self, k: int) -> "JetEnclosure":
        out = self ** k
        # tighter order-0 coefficient for even powers
        if k and self.coeffs[0] is not None:
            out.coeffs[0] = out.coeffs[0].intersect(self.coeffs[0] ** k)
        return out

    def __repr__(self):
        return f"JetEnclosure(n={self.n}, r={self.r}, {dict(self.items())})"


def eval_poly_on_jets(p: Poly, jets: Sequence[JetEnclosure]) -> JetEnclosure:
    """Evaluate ``p`` with its variables bound positionally to ``jets``."""
    n, r = jets[0].n, jets[0].r
    powers: Dict[Tuple[int, int], JetEnclosure] = {}

    def pw(i, e):
        key = (i, e)
        if key not in powers:
            powers[key] = jets[i] if e == 1 else pw(i, e - 1) * jets[i]
        return powers[key]

    total = JetEnclosure.constant(0, n, r)
    for mono, c in p.terms.items():
        term = None
        for i, e in enumerate(mono):
            if e:
                f = pw(i, e)
                term = f if term is None else term * f
        if term is None:
            total = total + Interval(c)
        else:
            total = total + term.scale(c)
    return total


@lru_cache(maxsize=4096)
def _branch_derivative(p: Poly) -> Poly:
    return p.derivative(p.vars[-1])


def _eval_interval(p: Poly, values: Sequence) -> Interval:
    r = p.evaluate(dict(zip(p.vars, values)))
    return r if isinstance(r, Interval) else Interval(r)


BRANCH_SPLIT_DEPTH = 10


@lru_cache(maxsize=4096)
def _linear_parts(p: Poly):
    """``(c0, c1)`` with ``p = c0 + c1 * y`` when ``p`` is linear in its last variable."""
    y = p.vars[-1]
    if p.degree(y) != 1:
        return None
    c0, c1 = p.coeffs_in(y)
    return c0.with_vars(p.vars), c1.with_vars(p.vars)


def _linear_branch(node: RootOf, ranges: Sequence[Interval]):
    parts = _linear_parts(node.poly)
    if parts is None or node.index != 0 or node.count not in (None, 1):
        return None
    c0, c1 = (_eval_interval(c, [*ranges, Interval(0)]) for c in parts)
    if c1.contains_zero():
        return None
    y = -(c0 / c1)
    if not (node.window[0] < y.lo and y.hi < node.window[1]):
        return None
    return y, c1


def _split_scaled(iv: Interval) -> Tuple[Interval, Interval]:
    """Bisect, or split at the geometric mean when the interval spans many binades near 0 or 1."""
    lo, hi = iv.lo, iv.hi
    if 0 < lo and hi > 4 * lo:
        m = mpq(math.sqrt(float(lo) * float(hi)))
        if lo < m < hi:
            return Interval(lo, m), Interval(m, hi)
    if hi < 1 and 1 - lo > 4 * (1 - hi):
        m = 1 - mpq(math.sqrt(float(1 - lo) * float(1 - hi)))
        if lo < m < hi:
            return Interval(lo, m), Interval(m, hi)
    return iv.bisect()


def branch_enclosure(node: RootOf, ranges: Sequence[Interval]) -> Tuple[Interval, Interval]:
    """Enclosure of the branch value over an argument box, plus of dp/dy there.

    Argument boxes on which interval Newton does not contract are bisected
    (up to ``BRANCH_SPLIT_DEPTH`` levels) and the pieces hulled.  When the
    branch is certified monotone in every argument, the value enclosure is
    tightened to the hull of the values at the box corners.
    """
    ranges = list(ranges)
    fast = _linear_branch(node, ranges)
    if fast is not None:
        return fast
    stack = [(ranges, 0)]
    Y = D = None
    while stack:
        rs, depth = stack.pop()
        try:
            y, d = _newton_enclosure(node, rs)
        except GuardViolation:
            widths = [iv.width for iv in rs]
            if depth >= BRANCH_SPLIT_DEPTH or not any(widths):
                raise
            k = widths.index(max(widths))
            a, b = _split_scaled(rs[k])
            stack.append((rs[:k] + [a] + rs[k + 1:], depth + 1))
            stack.append((rs[:k] + [b] + rs[k + 1:], depth + 1))
            continue
        Y = y if Y is None else Y.hull(y)
        D = d if D is None else D.hull(d)
    if not all(iv.is_point() for iv in ranges):
        tight = _monotone_tighten(node, ranges, Y)
        if tight is not Y:
            Y = tight
            D = _eval_interval(_branch_derivative(node.poly), [*ranges, Y])
    return Y, D


def _monotone_tighten(node: RootOf, ranges, Y: Interval) -> Interval:
    p = node.poly
    for v in p.vars[:-1]:
        g = _eval_interval(p.derivative(v), [*ranges, Y])
        if g.contains_zero() and not (g.lo == 0 and g.hi == 0):
            return Y
    from itertools import product
    lo = hi = None
    for corner in product(*[(iv.lo, iv.hi) if not iv.is_point() else (iv.lo,) for iv in ranges]):
        q = p.subs(dict(zip(p.vars[:-1], corner)))
        roots = isolate_real_roots(q.univariate_coeffs(), Y.lo - mpq(1, 2**200), Y.hi + mpq(1, 2**200))
        if len(roots) != 1:
            return Y
        iso = refine_root(roots[0], mpq(1, 2**64))
        lo = iso.lo if lo is None else min(lo, iso.lo)
        hi = iso.hi if hi is None else max(hi, iso.hi)
    return Interval(max(lo, Y.lo), min(hi, Y.hi)) if max(lo, Y.lo) <= min(hi, Y.hi) else Y


def _newton_enclosure(node: RootOf, ranges: Sequence[Interval]) -> Tuple[Interval, Interval]:
    """Interval Newton over an argument box.

    Parametric interval Newton: with ``Y`` around the branch value at the box
    center, ``N = y~ - p(R, y~) / p_y(R, Y)`` strictly inside ``Y`` certifies a
    unique root in ``Y`` for every argument in ``R``.
    """
    p = node.poly
    py = _branch_derivative(p)
    yname = p.vars[-1]
    center = [iv.mid() for iv in ranges]
    q = p.subs(dict(zip(p.vars[:-1], center)))
    if not q.involves(yname):
        raise GuardViolation("branch polynomial degenerates at box center", ranges)
    roots = isolate_real_roots(q.univariate_coeffs(), node.window[0], node.window[1])
    if node.count is not None and len(roots) != node.count:
        raise GuardViolation(
            f"expected {node.count} roots in window, found {len(roots)}", ranges)
    if node.index >= len(roots):
        raise GuardViolation(f"branch {node.index} missing ({len(roots)} roots)", ranges)
    iso = roots[node.index]
    span = max((iv.width for iv in ranges), default=mpq(0))
    iso = refine_root(iso, min(mpq(1, 2**40), span / 2**20) if span else mpq(1, 2**80))
    yt = iso.midpoint()
    if all(iv.is_point() for iv in ranges) and iso.exact:
        y = Interval(yt)
        d = _eval_interval(py, [*ranges, y])
        if d.contains_zero():
            raise GuardViolation("singular branch point", ranges)
        return y, d
    fy = _eval_interval(p, [*ranges, Interval(yt)])
    delta = max(iso.width, mpq(1, 2**200))
    # rough initial radius from one Newton step at the center
    try:
        d0 = _eval_interval(py, [*ranges, Interval(iso.lo, iso.hi)])
        if not d0.contains_zero():
            delta = max(delta, 2 * (fy / d0).mag())
    except ZeroDivisionError:
        pass
    for _ in range(40):
        Y = Interval(yt - delta, yt + delta)
        d = _eval_interval(py, [*ranges, Y])
        if d.contains_zero():
            raise GuardViolation("dp/dy encloses zero on the box", ranges)
        N = Interval(yt) - fy / d
        if N.lo > Y.lo and N.hi < Y.hi:
            for _ in range(2):
                Y = N
                ym = Y.mid()
                d = _eval_interval(py, [*ranges, Y])
                N2 = Interval(ym) - _eval_interval(p, [*ranges, Interval(ym)]) / d
                if not N2.intersects(Y):
                    break
                N = N2.intersect(Y)
            return N, _eval_interval(py, [*ranges, N])
        need = max(yt - N.lo, N.hi - yt)
        delta = max(2 * delta, need * 5 / 4)
    raise GuardViolation("interval Newton did not contract", ranges)


@lru_cache(maxsize=4096)
def _constant_branch(node: RootOf) -> Tuple[Interval, Interval]:
    return branch_enclosure(node, [])


def implicit_branch_jet(node: RootOf, arg_jets: Sequence[JetEnclosure], n: int = None,
                        r: int = None) -> JetEnclosure:
    """Jet of the branch ``y(args)`` solving ``p(args, y(args)) = 0`` order by order."""
    if arg_jets:
        n, r = arg_jets[0].n, arg_jets[0].r
    ranges = [a.value for a in arg_jets]
    Y, dpy = branch_enclosure(node, ranges) if ranges else _constant_branch(node)
    y = JetEnclosure.constant(Y, n, r, arg_jets[0].box if arg_jets else None)
    if y.coeffs[0] is None:
        y.coeffs[0] = Interval(0)
    if r == 0:
        return y
    idx, _, _, degree = _tables(n, r)
    inv = dpy.reciprocal()
    for k in range(1, r + 1):
        P = eval_poly_on_jets(node.poly, [*arg_jets, y])
        for pos, d in enumerate(degree):
            if d == k:
                c = P.coeffs[pos]
                y.coeffs[pos] = None if c is None else -(c * inv)
    return y


def jet_eval(e: Expr, box: Sequence, r: int) -> JetEnclosure:
    """Rigorous jet enclosure of ``e`` over ``box`` up to total order ``r``."""
    if r > MAX_ORDER:
        raise OrderTooLarge(f"order {r} exceeds cap {MAX_ORDER}")
    box = [Interval.coerce(b) if not isinstance(b, tuple) else Interval(*b) for b in box]
    n = len(box)
    memo: Dict[int, JetEnclosure] = {}
    for node in nodes(e):
        if isinstance(node, Const):
            out = JetEnclosure.constant(node.value, n, r, box)
        elif isinstance(node, Var):
            if node.index > n:
                raise ValueError(f"Var({node.index}) outside a {n}-dimensional box")
            out = JetEnclosure.variable(node.index, box, r)
        elif isinstance(node, Add):
            out = memo[id(node.a)] + memo[id(node.b)]
        elif isinstance(node, Sub):
            out = memo[id(node.a)] - memo[id(node.b)]
        elif isinstance(node, Mul):
            out = memo[id(node.a)] * memo[id(node.b)]
        elif isinstance(node, Pow):
            out = memo[id(node.base)].power(node.n)
        elif isinstance(node, RootOf):
            out = implicit_branch_jet(node, [memo[id(a)] for a in node.args], n, r)
        else:
            raise TypeError(node)
        memo[id(node)] = out
    out = memo[id(e)]
    out.box = box
    return out


def enclose(e: Expr, box: Sequence) -> Interval:
    """Range enclosure of ``e`` over ``box``."""
    return jet_eval(e, box, 0).value
