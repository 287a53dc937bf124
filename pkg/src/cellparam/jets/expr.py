"""Closed expression DAGs for map coordinates and pullbacks.

Nodes: ``Const``, ``Var`` (1-based), ``Add``, ``Sub``, ``Mul``, ``Pow`` and
``RootOf``.  A ``RootOf`` node names one smooth real branch ``y(args)`` of
``p(args, y) = 0``: the ``index``-th real root (0-based, increasing) among the
roots lying in the open window ``(lo, hi)``.  The last variable of ``p`` is the
branch variable; the others are bound positionally to ``args``.

Use the module-level constructors (``const``, ``var``, ``add``...), which fold
constants and trivial identities.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Mapping, Optional, Sequence, Tuple

from gmpy2 import mpq

from ..algebra.poly import Poly, Q, Rational, format_rational
from ..algebra.sexpr import ParseError, dumps, head, parse, parse_rational, poly_from_sexpr, poly_to_sexpr


class Expr:
    __slots__ = ()

    def children(self) -> Tuple["Expr", ...]:
        return ()

    # operator sugar
    def __add__(self, other):
        return add(self, _lift(other))

    def __radd__(self, other):
        return add(_lift(other), self)

    def __sub__(self, other):
        return sub(self, _lift(other))

    def __rsub__(self, other):
        return sub(_lift(other), self)

    def __mul__(self, other):
        return mul(self, _lift(other))

    def __rmul__(self, other):
        return mul(_lift(other), self)

    def __neg__(self):
        return mul(const(-1), self)

    def __pow__(self, n: int):
        return power(self, n)

    def __str__(self) -> str:
        return to_text(self)


def _lift(x) -> Expr:
    return x if isinstance(x, Expr) else const(x)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: Rational


@dataclass(frozen=True, eq=True)
class Var(Expr):
    index: int

    def __post_init__(self):
        if self.index < 1:
            raise ValueError("variable indices start at 1")


@dataclass(frozen=True, eq=True)
class Add(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)


@dataclass(frozen=True, eq=True)
class Sub(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)


@dataclass(frozen=True, eq=True)
class Mul(Expr):
    a: Expr
    b: Expr

    def children(self):
        return (self.a, self.b)


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    n: int

    def children(self):
        return (self.base,)


@dataclass(frozen=True, eq=True)
class RootOf(Expr):
    poly: Poly
    args: Tuple[Expr, ...]
    index: int
    window: Tuple[Rational, Rational] = (mpq(0), mpq(1))
    count: Optional[int] = None

    def __post_init__(self):
        if len(self.poly.vars) != len(self.args) + 1:
            raise ValueError(
                f"RootOf polynomial over {self.poly.vars} needs {len(self.poly.vars) - 1} args")
        if self.poly.degree(self.poly.vars[-1]) < 1:
            raise ValueError("RootOf polynomial must involve the branch variable")

    def children(self):
        return self.args

    @property
    def branch_var(self) -> str:
        return self.poly.vars[-1]


# smart constructors

def const(c) -> Const:
    return Const(Q(c))


def var(i: int) -> Var:
    return Var(i)


ZERO = Const(mpq(0))
ONE = Const(mpq(1))


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if a == ZERO:
        return b
    if b == ZERO:
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if b == ZERO:
        return a
    if a == b:
        return ZERO
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if a == ZERO or b == ZERO:
        return ZERO
    if a == ONE:
        return b
    if b == ONE:
        return a
    return Mul(a, b)


def power(a: Expr, n: int) -> Expr:
    if n < 0:
        raise ValueError("negative power")
    if n == 0:
        return ONE
    if n == 1:
        return a
    if isinstance(a, Const):
        return Const(a.value ** n)
    return Pow(a, n)


def affine(c0, c1, e: Expr) -> Expr:
    """``c0 + c1 * e``."""
    return add(const(c0), mul(const(c1), e))


# structural queries

def nodes(e: Expr):
    """Post-order traversal without repeats."""
    seen = set()
    order = []
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for c in reversed(node.children()):
            stack.append((c, False))
    return order


def variables(e: Expr) -> frozenset:
    return frozenset(n.index for n in nodes(e) if isinstance(n, Var))


def max_var(e: Expr) -> int:
    return max(variables(e), default=0)


def has_rootof(e: Expr) -> bool:
    return any(isinstance(n, RootOf) for n in nodes(e))


def substitute(e: Expr, mapping: Mapping[int, Expr]) -> Expr:
    """Replace ``Var(i)`` by ``mapping[i]`` everywhere (simultaneously)."""
    memo: Dict[int, Expr] = {}
    for node in nodes(e):
        if isinstance(node, Var):
            out = mapping.get(node.index, node)
        elif isinstance(node, Const):
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
            out = RootOf(node.poly, tuple(memo[id(a)] for a in node.args), node.index, node.window, node.count)
        else:
            raise TypeError(node)
        memo[id(node)] = out
    return memo[id(e)]


def var_names(n: int) -> Tuple[str, ...]:
    return tuple(f"x{i}" for i in range(1, n + 1))


def to_poly(e: Expr, n: Optional[int] = None) -> Optional[Poly]:
    """Polynomial in ``x1..xn`` if ``e`` has no RootOf node, else None."""
    if has_rootof(e):
        return None
    n = max(max_var(e), 1) if n is None else n
    names = var_names(n)
    memo: Dict[int, Poly] = {}
    for node in nodes(e):
        if isinstance(node, Const):
            out = Poly.const(node.value, names)
        elif isinstance(node, Var):
            out = Poly.var(names[node.index - 1], names)
        elif isinstance(node, Add):
            out = memo[id(node.a)] + memo[id(node.b)]
        elif isinstance(node, Sub):
            out = memo[id(node.a)] - memo[id(node.b)]
        elif isinstance(node, Mul):
            out = memo[id(node.a)] * memo[id(node.b)]
        elif isinstance(node, Pow):
            out = memo[id(node.base)] ** node.n
        memo[id(node)] = out
    return memo[id(e)]


def from_poly(p: Poly, names: Optional[Sequence[str]] = None) -> Expr:
    """Expr for a polynomial; variable ``names[i]`` becomes ``Var(i + 1)``."""
    names = tuple(names) if names is not None else p.vars
    idx = {v: names.index(v) + 1 for v in p.used_vars()}
    out: Expr = ZERO
    for mono in sorted(p.terms):
        term: Expr = const(p.terms[mono])
        for v, k in zip(p.vars, mono):
            if k:
                term = mul(term, power(Var(idx[v]), k))
        out = add(out, term)
    return out


def simplify(e: Expr) -> Expr:
    """Collapse RootOf-free expressions to expanded polynomial form."""
    p = to_poly(e)
    if p is None:
        return e
    return from_poly(p, var_names(max(max_var(e), 1)))


# exact point evaluation (RootOf-free)

def eval_rational(e: Expr, point: Sequence) -> Rational:
    point = [Q(v) for v in point]
    memo: Dict[int, Rational] = {}
    for node in nodes(e):
        if isinstance(node, Const):
            out = node.value
        elif isinstance(node, Var):
            out = point[node.index - 1]
        elif isinstance(node, Add):
            out = memo[id(node.a)] + memo[id(node.b)]
        elif isinstance(node, Sub):
            out = memo[id(node.a)] - memo[id(node.b)]
        elif isinstance(node, Mul):
            out = memo[id(node.a)] * memo[id(node.b)]
        elif isinstance(node, Pow):
            out = memo[id(node.base)] ** node.n
        else:
            raise TypeError("eval_rational needs a RootOf-free expression")
        memo[id(node)] = out
    return memo[id(e)]


# text format

def to_sexpr(e: Expr):
    if isinstance(e, Const):
        return ["const", format_rational(e.value)]
    if isinstance(e, Var):
        return ["var", str(e.index)]
    if isinstance(e, Add):
        return ["+", to_sexpr(e.a), to_sexpr(e.b)]
    if isinstance(e, Sub):
        return ["-", to_sexpr(e.a), to_sexpr(e.b)]
    if isinstance(e, Mul):
        return ["*", to_sexpr(e.a), to_sexpr(e.b)]
    if isinstance(e, Pow):
        return ["pow", to_sexpr(e.base), str(e.n)]
    if isinstance(e, RootOf):
        box = ["box", format_rational(e.window[0]), format_rational(e.window[1])]
        if e.count is not None:
            box.append(str(e.count))
        return ["rootof", poly_to_sexpr(e.poly), str(e.index), box, *[to_sexpr(a) for a in e.args]]
    raise TypeError(e)


def to_text(e: Expr) -> str:
    return dumps(to_sexpr(e))


def from_sexpr(form) -> Expr:
    tag = head(form)
    pos = getattr(form, "pos", 0)

    def nargs(k):
        if len(form) != k + 1:
            raise ParseError(f"({tag} ...) takes {k} argument(s)", pos)

    if tag == "const":
        nargs(1)
        return Const(parse_rational(form[1]))
    if tag == "var":
        nargs(1)
        if not str(form[1]).isdigit() or int(form[1]) < 1:
            raise ParseError("variable index must be a positive integer", pos)
        return Var(int(form[1]))
    if tag in ("+", "-", "*"):
        nargs(2)
        a, b = from_sexpr(form[1]), from_sexpr(form[2])
        return {"+": Add, "-": Sub, "*": Mul}[tag](a, b)
    if tag == "pow":
        nargs(2)
        if not str(form[2]).isdigit():
            raise ParseError("exponent must be a natural number", pos)
        return Pow(from_sexpr(form[1]), int(form[2]))
    if tag == "rootof":
        if len(form) < 4:
            raise ParseError("(rootof <poly> <k> <guard-box> args...)", pos)
        p = poly_from_sexpr(form[1])
        if not str(form[2]).isdigit():
            raise ParseError("branch index must be a natural number", pos)
        box = form[3]
        if head(box) != "box" or len(box) not in (3, 4):
            raise ParseError("guard box must be (box lo hi [count])", getattr(box, "pos", pos))
        window = (parse_rational(box[1]), parse_rational(box[2]))
        count = int(box[3]) if len(box) == 4 else None
        args = tuple(from_sexpr(a) for a in form[4:])
        if not args:
            args = tuple(Var(i + 1) for i in range(len(p.vars) - 1))
        try:
            return RootOf(p, args, int(form[2]), window, count)
        except ValueError as exc:
            raise ParseError(str(exc), pos) from None
    raise ParseError(f"unknown expression tag {tag!r}", pos)


def from_text(text: str) -> Expr:
    return from_sexpr(parse(text))
