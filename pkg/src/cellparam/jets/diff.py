"""Symbolic partial derivatives of expressions.

The derivative of a branch ``y = RootOf(p, args)`` is
``-sum_j p_j(args, y) * d(arg_j) / p_y(args, y)``.  Expressions have no
division node, so the quotient is itself a ``RootOf`` of the linear
polynomial ``d * z + n``, which the jet engine evaluates in closed form.
"""

from __future__ import annotations

from typing import Dict, Sequence

from gmpy2 import mpq

from ..algebra.poly import Poly
from .expr import (ZERO, Add, Const, Expr, Mul, Pow, RootOf, Sub, Var, add, const, has_rootof, mul, nodes, power,
                   simplify, sub)

QUOTIENT_WINDOW = (mpq(-2**100), mpq(2**100))


def _quotient_poly() -> Poly:
    names = ("n", "d", "z")
    return Poly.var("d", names) * Poly.var("z", names) + Poly.var("n", names)


def neg_quotient(n: Expr, d: Expr) -> Expr:
    """``-n / d`` as a branch of ``d * z + n = 0``."""
    if isinstance(n, Const) and n.value == 0:
        return ZERO
    if isinstance(d, Const):
        return mul(const(-1 / d.value), n)
    return RootOf(_quotient_poly(), (n, d), 0, QUOTIENT_WINDOW, 1)


def poly_at(p: Poly, values: Sequence[Expr]) -> Expr:
    """``p`` evaluated at expressions bound positionally to its variables."""
    out: Expr = ZERO
    for mono in sorted(p.terms):
        term: Expr = const(p.terms[mono])
        for v, k in zip(values, mono):
            if k:
                term = mul(term, power(v, k))
        out = add(out, term)
    return out


def diff(e: Expr, i: int) -> Expr:
    """``d e / d x_i``."""
    memo: Dict[int, Expr] = {}
    for node in nodes(e):
        if isinstance(node, Const):
            out = ZERO
        elif isinstance(node, Var):
            out = const(1) if node.index == i else ZERO
        elif isinstance(node, Add):
            out = add(memo[id(node.a)], memo[id(node.b)])
        elif isinstance(node, Sub):
            out = sub(memo[id(node.a)], memo[id(node.b)])
        elif isinstance(node, Mul):
            out = add(mul(memo[id(node.a)], node.b), mul(node.a, memo[id(node.b)]))
        elif isinstance(node, Pow):
            out = mul(mul(const(node.n), power(node.base, node.n - 1)), memo[id(node.base)])
        elif isinstance(node, RootOf):
            p = node.poly
            values = [*node.args, node]
            num: Expr = ZERO
            for v, a in zip(p.vars[:-1], node.args):
                da = memo[id(a)]
                if isinstance(da, Const) and da.value == 0:
                    continue
                num = add(num, mul(poly_at(p.derivative(v), values), da))
            out = neg_quotient(num, poly_at(p.derivative(p.vars[-1]), values))
        else:
            raise TypeError(node)
        if not isinstance(out, (Const, Var)) and not has_rootof(out):
            out = simplify(out)
        memo[id(node)] = out
    return memo[id(e)]


def diff_multi(e: Expr, alpha: Sequence[int]) -> Expr:
    """``D^alpha e``."""
    for i, k in enumerate(alpha, start=1):
        for _ in range(k):
            e = diff(e, i)
    return e
