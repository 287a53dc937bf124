"""Bridges to sympy for factorization over Q and infix parsing."""

from __future__ import annotations

from typing import List, Sequence, Tuple

import sympy

from .poly import Poly, Q


def to_sympy(p: Poly):
    gens = sympy.symbols(p.vars) if p.vars else ()
    expr = sympy.Integer(0)
    for mono, c in p.terms.items():
        term = sympy.Rational(int(c.numerator), int(c.denominator))
        for g, e in zip(gens, mono):
            term *= g ** e
        expr += term
    return expr


def from_sympy(expr, variables: Sequence[str]) -> Poly:
    gens = sympy.symbols(list(variables))
    sp = sympy.Poly(sympy.expand(expr), *gens, domain="QQ") if variables else None
    if sp is None:
        return Poly.const(Q(str(sympy.Rational(expr))), ())
    terms = {}
    for mono, c in sp.terms():
        c = sympy.Rational(c)
        terms[mono] = Q(f"{c.p}/{c.q}")
    return Poly(variables, terms)


def parse_infix(text: str, variables: Sequence[str]) -> Poly:
    """Parse e.g. ``"x*y - 1/4"`` into a Poly over ``variables``."""
    local = {v: sympy.Symbol(v) for v in variables}
    expr = sympy.sympify(text.replace("^", "**"), locals=local, rational=True)
    return from_sympy(expr, variables)


def factor_list(p: Poly) -> Tuple[object, List[Tuple[Poly, int]]]:
    """Irreducible factors over Q with multiplicities."""
    if p.is_constant():
        return p.constant_value() if p.terms else Q(0), []
    expr = to_sympy(p)
    gens = sympy.symbols(p.vars)
    c, facs = sympy.factor_list(expr, *gens)
    return Q(str(c)), [(from_sympy(f, p.vars), m) for f, m in facs]


def squarefree_factors(p: Poly) -> List[Poly]:
    """Distinct non-constant irreducible factors, content-normalized."""
    return [f.content_normalized() for f, _ in factor_list(p)[1] if not f.is_constant()]
