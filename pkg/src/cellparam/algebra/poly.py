"""Sparse multivariate polynomials with exact rational coefficients."""

from __future__ import annotations

from itertools import product
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from gmpy2 import mpq

Rational = type(mpq(0))
Monomial = Tuple[int, ...]


def Q(value) -> Rational:
    """Coerce ints, Fractions, strings like ``"3/4"`` and mpq to mpq."""
    if isinstance(value, Rational):
        return value
    if isinstance(value, str):
        return mpq(value.strip())
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        return mpq(int(value.numerator), int(value.denominator))
    if isinstance(value, float):
        return mpq(value)
    return mpq(value)


def format_rational(q) -> str:
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class UnknownVariable(KeyError):
    pass


class Poly:
    """Polynomial over Q in an ordered tuple of named variables.

    Terms map exponent tuples to nonzero coefficients.  Instances are treated
    as immutable; arithmetic between polynomials in different variable lists
    works over the union of the variables.
    """

    __slots__ = ("vars", "terms", "_hash")

    def __init__(self, variables: Sequence[str], terms: Mapping[Monomial, object] = ()):
        self.vars: Tuple[str, ...] = tuple(variables)
        if len(set(self.vars)) != len(self.vars):
            raise ValueError(f"duplicate variables in {self.vars}")
        clean: Dict[Monomial, Rational] = {}
        n = len(self.vars)
        for mono, c in dict(terms).items():
            mono = tuple(int(e) for e in mono)
            if len(mono) != n or any(e < 0 for e in mono):
                raise ValueError(f"bad exponent vector {mono} for variables {self.vars}")
            c = Q(c)
            if c:
                clean[mono] = clean.get(mono, mpq(0)) + c
                if not clean[mono]:
                    del clean[mono]
        self.terms: Dict[Monomial, Rational] = clean
        self._hash = None

    # construction helpers
    @classmethod
    def const(cls, c, variables: Sequence[str] = ()) -> "Poly":
        return cls(variables, {(0,) * len(variables): c})

    @classmethod
    def var(cls, name: str, variables: Sequence[str] | None = None) -> "Poly":
        variables = tuple(variables) if variables is not None else (name,)
        mono = tuple(1 if v == name else 0 for v in variables)
        if name not in variables:
            raise UnknownVariable(name)
        return cls(variables, {mono: 1})

    @classmethod
    def from_univariate(cls, coeffs: Sequence, name: str) -> "Poly":
        """Build from coefficients listed low degree first."""
        return cls((name,), {(i,): c for i, c in enumerate(coeffs)})

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_value(self) -> Rational:
        if not self.is_constant():
            raise ValueError("polynomial is not constant")
        return next(iter(self.terms.values()), mpq(0))

    def _index(self, var: str) -> int:
        try:
            return self.vars.index(var)
        except ValueError:
            raise UnknownVariable(var) from None

    def degree(self, var: str | None = None) -> int:
        if not self.terms:
            return -1
        if var is None:
            return max(sum(m) for m in self.terms)
        if var not in self.vars:
            return 0
        i = self._index(var)
        return max(m[i] for m in self.terms)

    def involves(self, var: str) -> bool:
        return var in self.vars and self.degree(var) > 0

    def used_vars(self) -> Tuple[str, ...]:
        return tuple(v for i, v in enumerate(self.vars) if any(m[i] for m in self.terms))

    # variable bookkeeping
    def with_vars(self, variables: Sequence[str]) -> "Poly":
        """Re-express over ``variables`` (must contain every used variable)."""
        variables = tuple(variables)
        if variables == self.vars:
            return self
        for v in self.used_vars():
            if v not in variables:
                raise UnknownVariable(v)
        pos = [self.vars.index(v) if v in self.vars else None for v in variables]
        terms = {}
        for m, c in self.terms.items():
            terms[tuple(m[p] if p is not None else 0 for p in pos)] = c
        return Poly(variables, terms)

    def _unify(self, other: "Poly") -> Tuple["Poly", "Poly"]:
        if self.vars == other.vars:
            return self, other
        merged = list(self.vars) + [v for v in other.vars if v not in self.vars]
        return self.with_vars(merged), other.with_vars(merged)

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            return other
        return Poly.const(other, self.vars)

    # arithmetic
    def __add__(self, other) -> "Poly":
        a, b = self._unify(self._coerce(other))
        terms = dict(a.terms)
        for m, c in b.terms.items():
            terms[m] = terms.get(m, mpq(0)) + c
        return Poly(a.vars, terms)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly(self.vars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "Poly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Poly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "Poly":
        if not isinstance(other, Poly):
            c = Q(other)
            return Poly(self.vars, {m: c * v for m, v in self.terms.items()})
        a, b = self._unify(other)
        terms: Dict[Monomial, Rational] = {}
        for m1, c1 in a.terms.items():
            for m2, c2 in b.terms.items():
                m = tuple(x + y for x, y in zip(m1, m2))
                terms[m] = terms.get(m, mpq(0)) + c1 * c2
        return Poly(a.vars, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power")
        result = Poly.const(1, self.vars)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def scale(self, c) -> "Poly":
        return self * Q(c)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Poly):
            if self.is_constant():
                try:
                    return self.constant_value() == Q(other)
                except (TypeError, ValueError):
                    return False
            return False
        a, b = self._unify(other)
        return a.terms == b.terms

    def __hash__(self) -> int:
        if self._hash is None:
            used = self.used_vars()
            p = self.with_vars(sorted(used))
            self._hash = hash((p.vars, frozenset(p.terms.items())))
        return self._hash

    # calculus and evaluation
    def derivative(self, var: str) -> "Poly":
        i = self._index(var)
        terms = {}
        for m, c in self.terms.items():
            if m[i]:
                mm = list(m)
                mm[i] -= 1
                terms[tuple(mm)] = c * m[i]
        return Poly(self.vars, terms)

    def evaluate(self, values: Mapping[str, object]):
        """Evaluate at a point; values may be any ring elements (mpq, Interval, ...)."""
        vals = [values[v] if v in values else None for v in self.vars]
        total = None
        for m, c in self.terms.items():
            t = c
            for v, e in zip(vals, m):
                if e:
                    if v is None:
                        raise UnknownVariable(self.vars[m.index(e)])
                    t = t * (v ** e if e > 1 else v)
            total = t if total is None else total + t
        return mpq(0) if total is None else total

    def __call__(self, **values):
        return self.evaluate(values)

    def subs(self, values: Mapping[str, object]) -> "Poly":
        """Substitute rationals or polynomials for variables."""
        keep = [v for v in self.vars if v not in values]
        out = Poly.const(0, keep)
        cache: Dict[Tuple[str, int], Poly] = {}
        for m, c in self.terms.items():
            term = Poly.const(c, keep)
            rest = [0] * len(keep)
            for v, e in zip(self.vars, m):
                if not e:
                    continue
                if v in values:
                    key = (v, e)
                    if key not in cache:
                        val = values[v]
                        val = val if isinstance(val, Poly) else Poly.const(val, keep)
                        cache[key] = val ** e
                    term = term * cache[key]
                else:
                    rest[keep.index(v)] = e
            out = out + term * Poly(keep, {tuple(rest): 1})
        return out

    def rename(self, mapping: Mapping[str, str]) -> "Poly":
        return Poly([mapping.get(v, v) for v in self.vars], self.terms)

    # univariate views
    def coeffs_in(self, var: str) -> list:
        """Coefficients (low degree first) as polynomials in the other variables."""
        rest = tuple(v for v in self.vars if v != var)
        if var not in self.vars:
            return [self.with_vars(rest)] if self.terms else []
        i = self._index(var)
        d = self.degree(var)
        buckets = [dict() for _ in range(d + 1)]
        for m, c in self.terms.items():
            buckets[m[i]][m[:i] + m[i + 1:]] = c
        return [Poly(rest, b) for b in buckets]

    @classmethod
    def from_coeffs_in(cls, coeffs: Sequence["Poly"], var: str, variables: Sequence[str]) -> "Poly":
        out = Poly.const(0, variables)
        x = Poly.var(var, variables)
        for k, c in enumerate(coeffs):
            out = out + c.with_vars(variables) * x ** k
        return out

    def leading_coeff(self, var: str) -> "Poly":
        cs = self.coeffs_in(var)
        return cs[-1] if cs else Poly.const(0, tuple(v for v in self.vars if v != var))

    def univariate_coeffs(self) -> list:
        """Dense mpq coefficient list for a polynomial in at most one used variable."""
        used = self.used_vars()
        if len(used) > 1:
            raise ValueError(f"not univariate: uses {used}")
        if not used:
            return [self.constant_value()] if self.terms else []
        return [c.constant_value() if c.terms else mpq(0) for c in self.coeffs_in(used[0])]

    def content_normalized(self) -> "Poly":
        """Scale so coefficients are coprime integers with positive leading term."""
        if not self.terms:
            return self
        from math import gcd, lcm
        den = 1
        for c in self.terms.values():
            den = lcm(den, int(c.denominator))
        nums = [int(c * den) for c in self.terms.values()]
        g = 0
        for n in nums:
            g = gcd(g, n)
        lead = self.terms[max(self.terms)]
        s = mpq(den, g) if lead > 0 else -mpq(den, g)
        return self * s

    def __repr__(self) -> str:
        return f"Poly({self.to_str()!r}, vars={self.vars})"

    def to_str(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for m in sorted(self.terms, reverse=True):
            c = self.terms[m]
            mono = "*".join(f"{v}^{e}" if e > 1 else v for v, e in zip(self.vars, m) if e)
            if not mono:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{format_rational(c)}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")


def poly_derivative(p: Poly, var: str) -> Poly:
    return p.derivative(var)


def _det(matrix: list) -> Rational:
    """Exact determinant by Gaussian elimination over Q."""
    a = [list(row) for row in matrix]
    n = len(a)
    det = mpq(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col]), None)
        if piv is None:
            return mpq(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            if a[r][col]:
                f = a[r][col] / p
                row, prow = a[r], a[col]
                for k in range(col + 1, n):
                    row[k] -= f * prow[k]
    return det


def sylvester_matrix(f: Sequence, g: Sequence) -> list:
    """Sylvester matrix of dense coefficient lists (low degree first)."""
    m, n = len(f) - 1, len(g) - 1
    size = m + n
    rows = []
    for i in range(n):
        row = [mpq(0)] * size
        for j, c in enumerate(reversed(f)):
            row[i + j] = c
        rows.append(row)
    for i in range(m):
        row = [mpq(0)] * size
        for j, c in enumerate(reversed(g)):
            row[i + j] = c
        rows.append(row)
    return rows


def _univariate_resultant(f: Sequence, g: Sequence) -> Rational:
    if len(f) < 2 and len(g) < 2:
        return mpq(1)
    return _det(sylvester_matrix(f, g))


def _interpolate(points: Sequence[Rational], values: Sequence[Poly], var: str, variables) -> Poly:
    """Newton interpolation of polynomial-valued samples in one variable."""
    n = len(points)
    coef = [v.with_vars(variables) for v in values]
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) * (1 / (points[i] - points[i - j]))
    x = Poly.var(var, variables)
    out = coef[-1]
    for i in range(n - 2, -1, -1):
        out = out * (x - points[i]) + coef[i]
    return out


def poly_resultant(p: Poly, q: Poly, var: str) -> Poly:
    """Resultant eliminating ``var`` (Sylvester determinant of formal degrees).

    Multivariate coefficients are handled by evaluation at rational nodes and
    interpolation, one remaining variable at a time.
    """
    p, q = p._unify(q)
    if var not in p.vars or p.degree(var) < 1 or q.degree(var) < 1:
        raise ValueError(f"both polynomials must involve {var!r}")
    rest = tuple(v for v in p.vars if v != var and (p.involves(v) or q.involves(v)))
    dp, dq = p.degree(var), q.degree(var)
    return _resultant_rec(p.with_vars(rest + (var,)), q.with_vars(rest + (var,)), var, dp, dq, rest)


def _resultant_rec(p: Poly, q: Poly, var: str, dp: int, dq: int, rest: Tuple[str, ...]) -> Poly:
    if not rest:
        f = [c.constant_value() if c.terms else mpq(0) for c in p.coeffs_in(var)]
        g = [c.constant_value() if c.terms else mpq(0) for c in q.coeffs_in(var)]
        f += [mpq(0)] * (dp + 1 - len(f))
        g += [mpq(0)] * (dq + 1 - len(g))
        return Poly.const(_univariate_resultant(f, g), ())
    z, tail = rest[0], rest[1:]
    bound = dq * p.degree(z) + dp * q.degree(z)
    nodes = [mpq(k) for k in range(bound + 1)]
    samples = []
    for t in nodes:
        samples.append(_resultant_rec(p.subs({z: t}), q.subs({z: t}), var, dp, dq, tail))
    return _interpolate(nodes, samples, z, rest)


def poly_discriminant(p: Poly, var: str) -> Poly:
    """``res(p, dp/dvar) / lc(p)``; only its zero set is used downstream."""
    r = poly_resultant(p, p.derivative(var), var)
    lc = p.leading_coeff(var)
    if lc.is_constant():
        return r * (1 / lc.constant_value())
    return exact_divide(r, lc)


def exact_divide(a: Poly, b: Poly) -> Poly:
    """Multivariate exact division; raises ValueError if ``b`` does not divide ``a``."""
    a, b = a._unify(b)
    if b.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    lead_b = max(b.terms)
    cb = b.terms[lead_b]
    quot: Dict[Monomial, Rational] = {}
    rem = a
    while rem.terms:
        lm = max(rem.terms)
        if any(x < y for x, y in zip(lm, lead_b)):
            raise ValueError("not an exact division")
        m = tuple(x - y for x, y in zip(lm, lead_b))
        c = rem.terms[lm] / cb
        quot[m] = c
        rem = rem - b * Poly(a.vars, {m: c})
    return Poly(a.vars, quot)


def grid_monomials(degs: Iterable[int]):
    return product(*(range(d + 1) for d in degs))
