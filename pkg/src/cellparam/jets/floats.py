"""Fast double-precision evaluation, used for sampling and search only."""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Dict, Sequence

import numpy as np

from ..algebra.poly import Poly
from .expr import Add, Const, Expr, Mul, Pow, RootOf, Sub, Var, nodes


@lru_cache(maxsize=4096)
def _compiled(p: Poly):
    """Coefficients of the branch variable as (float coeff, exponents) lists."""
    y = p.vars[-1]
    out = []
    for c in p.coeffs_in(y):
        out.append([(float(v), mono) for mono, v in c.terms.items()])
    return out


def _poly_float_roots(node: RootOf, args: Sequence[float]) -> list:
    coeffs = []
    for terms in _compiled(node.poly):
        s = 0.0
        for c, mono in terms:
            t = c
            for a, e in zip(args, mono):
                if e:
                    t *= a ** e
            s += t
        coeffs.append(s)
    while len(coeffs) > 1 and coeffs[-1] == 0.0:
        coeffs.pop()
    if len(coeffs) < 2:
        return []
    raw = np.roots(coeffs[::-1])
    lo, hi = float(node.window[0]), float(node.window[1])
    tol = 1e-7 * max(1.0, max(abs(z) for z in raw)) if len(raw) else 0.0
    real = sorted(z.real for z in raw if abs(z.imag) <= tol)
    out = [z for z in real if lo < z < hi]
    # polish with Newton steps on the real polynomial
    polished = []
    for z in out:
        for _ in range(3):
            f = df = 0.0
            for c in reversed(coeffs):
                df = df * z + f
                f = f * z + c
            if df == 0.0 or not math.isfinite(f / df):
                break
            z -= f / df
        polished.append(z)
    return sorted(polished)


def eval_float(e: Expr, point: Sequence[float]) -> float:
    """Approximate value of ``e``; NaN when a branch is missing."""
    memo: Dict[int, float] = {}
    for node in nodes(e):
        if isinstance(node, Const):
            out = float(node.value)
        elif isinstance(node, Var):
            out = float(point[node.index - 1])
        elif isinstance(node, Add):
            out = memo[id(node.a)] + memo[id(node.b)]
        elif isinstance(node, Sub):
            out = memo[id(node.a)] - memo[id(node.b)]
        elif isinstance(node, Mul):
            out = memo[id(node.a)] * memo[id(node.b)]
        elif isinstance(node, Pow):
            out = memo[id(node.base)] ** node.n
        elif isinstance(node, RootOf):
            args = [memo[id(a)] for a in node.args]
            if not args and node.window[1] - node.window[0] < 1e-12:
                # algebraic constant with a tight isolating window
                out = float((node.window[0] + node.window[1]) / 2)
            elif any(math.isnan(a) for a in args):
                out = math.nan
            else:
                roots = _poly_float_roots(node, args)
                out = roots[node.index] if node.index < len(roots) else math.nan
        else:
            raise TypeError(node)
        memo[id(node)] = out
    return memo[id(e)]
