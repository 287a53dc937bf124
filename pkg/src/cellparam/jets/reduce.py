"""Algebraic simplification of expressions after substitution.

A ``RootOf`` whose arguments are polynomials is rewritten as a single
polynomial relation in the free variables.  When the factor carrying the
branch is linear in the branch variable, the node collapses to a polynomial.
For example ``sqrt(t^2)`` on ``(0,1)`` becomes ``t``.
"""

from __future__ import annotations

from typing import Dict, Optional

from gmpy2 import mpq

from ..algebra.factor import squarefree_factors
from ..algebra.poly import Poly
from .expr import Add, Const, Expr, Mul, Pow, RootOf, Sub, Var, add, from_poly, has_rootof, max_var, mul, nodes, power, \
    simplify, sub, to_poly, var_names
from .interval import Interval
from .jet import GuardViolation, enclose

_PROBES = (mpq(1, 2), mpq(1, 3), mpq(2, 3), mpq(3, 7), mpq(5, 8))


def _relation(node: RootOf, n: int) -> Optional[Poly]:
    """``p(args(x), y)`` as a polynomial in ``x1..xn, y``."""
    names = var_names(n) + ("_y",)
    args = [to_poly(a, n) for a in node.args]
    if any(a is None for a in args):
        return None
    args = [a.with_vars(names) for a in args] + [Poly.var("_y", names)]
    out = Poly.const(0, names)
    powers: Dict[tuple, Poly] = {}
    for mono, c in node.poly.terms.items():
        term = Poly.const(c, names)
        for i, k in enumerate(mono):
            if k:
                key = (i, k)
                if key not in powers:
                    powers[key] = args[i] ** k
                term = term * powers[key]
        out = out + term
    return out


def _collapse(node: RootOf) -> Expr:
    n = max(max_var(node), 1)
    rel = _relation(node, n)
    if rel is None or not rel.involves("_y"):
        return node
    factors = [f for f in squarefree_factors(rel) if f.involves("_y")]
    if len(factors) == 1 and factors[0].degree("_y") > 1:
        return node
    names = var_names(n)
    for probe in _PROBES:
        point = [Interval(probe)] * n
        try:
            y = enclose(node, point)
        except (GuardViolation, ZeroDivisionError):
            continue
        hits = []
        for f in factors:
            vals = dict(zip(names, point))
            vals["_y"] = y
            v = f.evaluate(vals)
            v = v if isinstance(v, Interval) else Interval(v)
            if v.contains_zero():
                hits.append(f)
        if len(hits) != 1:
            continue
        f = hits[0]
        if f.degree("_y") != 1:
            return node
        c0, c1 = f.coeffs_in("_y")
        if not c1.is_constant():
            return node
        return from_poly((c0 * (-1 / c1.constant_value())).with_vars(names), names)
    return node


def reduce_expr(e: Expr) -> Expr:
    """Rebuild ``e`` bottom-up, expanding polynomial parts and collapsing branches."""
    memo: Dict[int, Expr] = {}
    algebraic: Dict[int, bool] = {}
    for node in nodes(e):
        kids = node.children()
        if isinstance(node, (Const, Var)):
            out = node
        elif isinstance(node, Add):
            out = add(memo[id(node.a)], memo[id(node.b)])
        elif isinstance(node, Sub):
            out = sub(memo[id(node.a)], memo[id(node.b)])
        elif isinstance(node, Mul):
            out = mul(memo[id(node.a)], memo[id(node.b)])
        elif isinstance(node, Pow):
            out = power(memo[id(node.base)], node.n)
        elif isinstance(node, RootOf):
            args = tuple(memo[id(a)] for a in node.args)
            out = RootOf(node.poly, args, node.index, node.window, node.count)
            if args and not any(algebraic[id(a)] for a in node.args):
                out = _collapse(out)
        else:
            raise TypeError(node)
        flag = isinstance(out, RootOf) or any(algebraic[id(k)] for k in kids)
        if flag and not isinstance(node, RootOf):
            flag = has_rootof(out)
        if not flag and not isinstance(out, (Const, Var)):
            out = simplify(out)
        algebraic[id(node)] = flag
        memo[id(node)] = out
    return memo[id(e)]
