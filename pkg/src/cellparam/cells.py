"""Basic cells, cellular maps and parametrizations.

A basic cell of length ``l`` is a product of factors that are either the open
unit interval (kind ``"I"``) or the point ``{0}`` (kind ``"0"``).  A cellular
map sends a basic cell into ``R^l`` through triangular coordinates
``f_i(x_1..x_i)``, each strictly increasing in ``x_i`` when the ``i``-th factor
is an interval.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from itertools import product
from typing import List, Optional, Sequence, Tuple

from gmpy2 import mpq

from .algebra.poly import Q
from .algebra.sexpr import ParseError, dumps, head, parse
from .jets.expr import (ZERO, Expr, Var, affine, from_sexpr, has_rootof, max_var, simplify, substitute,
                        to_sexpr, variables)
from .jets.floats import eval_float
from .jets.interval import Interval
from .jets.jet import GuardViolation, enclose, jet_eval

FULL, POINT = "I", "0"
MARGIN = mpq(1, 2**40)


@dataclass(frozen=True)
class BasicCell:
    kinds: Tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        bad = [k for k in self.kinds if k not in (FULL, POINT)]
        if bad:
            raise ValueError(f"cell factors must be 'I' or '0', got {bad}")

    @classmethod
    def of(cls, text: str) -> "BasicCell":
        """``BasicCell.of("I0")`` is the cell ``(0,1) x {0}``."""
        return cls(tuple(text))

    @property
    def length(self) -> int:
        return len(self.kinds)

    @property
    def dim(self) -> int:
        return sum(k == FULL for k in self.kinds)

    def full_indices(self) -> List[int]:
        return [i for i, k in enumerate(self.kinds) if k == FULL]

    def box(self) -> List[Interval]:
        return [Interval(0, 1) if k == FULL else Interval(0) for k in self.kinds]

    def __str__(self) -> str:
        return "".join(self.kinds)


class ImageEscapesDomain(ValueError):
    """The inner map's image is not contained in the outer map's cell."""


@dataclass(frozen=True)
class CellularMap:
    cell: BasicCell
    coords: Tuple[Expr, ...]

    def __post_init__(self):
        object.__setattr__(self, "coords", tuple(self.coords))
        if len(self.coords) != self.cell.length:
            raise ValueError("a cellular map has one coordinate per cell factor")
        for c in self.coords:
            if max_var(c) > self.cell.length:
                raise ValueError(f"coordinate uses a variable beyond the cell length {self.cell.length}")

    @classmethod
    def identity(cls, cell: BasicCell) -> "CellularMap":
        return cls(cell, tuple(Var(i + 1) if k == FULL else ZERO for i, k in enumerate(cell.kinds)))

    def __call__(self, point: Sequence[float]) -> Tuple[float, ...]:
        return tuple(eval_float(c, point) for c in self.coords)

    def to_sexpr(self) -> list:
        return ["map", ["cell", *self.cell.kinds], ["coords", *[to_sexpr(c) for c in self.coords]]]

    def to_text(self) -> str:
        return dumps(self.to_sexpr())

    @classmethod
    def from_sexpr(cls, form) -> "CellularMap":
        if head(form) != "map" or len(form) != 3 or head(form[1]) != "cell" or head(form[2]) != "coords":
            raise ParseError("expected (map (cell ...) (coords ...))", getattr(form, "pos", 0))
        try:
            cell = BasicCell(tuple(str(k) for k in form[1][1:]))
            return cls(cell, tuple(from_sexpr(c) for c in form[2][1:]))
        except ValueError as exc:
            if isinstance(exc, ParseError):
                raise
            raise ParseError(str(exc), getattr(form, "pos", 0)) from None


def _clean(e: Expr) -> Expr:
    return e if has_rootof(e) else simplify(e)


def _range_within(e: Expr, cell: BasicCell, lo, hi, max_depth: int = 16) -> Optional[bool]:
    """True if ``e`` maps the open cell into ``[lo, hi]``, False on a witness outside."""
    stack = [(cell.box(), 0)]
    kinds = cell.kinds
    while stack:
        box, depth = stack.pop()
        try:
            v = enclose(e, box)
        except (GuardViolation, ZeroDivisionError):
            v = None
            clipped = _clip(box, kinds)
            if clipped is None:
                continue
            try:
                v = enclose(e, clipped)
            except (GuardViolation, ZeroDivisionError):
                pass
        if v is not None and lo <= v.lo and v.hi <= hi:
            continue
        if v is not None and (v.lo > hi or v.hi < lo):
            return False
        if depth >= max_depth or cell.dim == 0:
            return None
        stack.extend((c, depth + 1) for c in _split(box, kinds))
    return True


def _clip(box, kinds, margin=MARGIN):
    out = []
    for b, k in zip(box, kinds):
        if k != FULL:
            out.append(b)
            continue
        lo, hi = max(b.lo, margin), min(b.hi, 1 - margin)
        if lo > hi:
            return None
        out.append(Interval(lo, hi))
    return out


def _split(box, kinds):
    widths = [b.width if k == FULL else -1 for b, k in zip(box, kinds)]
    i = widths.index(max(widths))
    a, b = box[i].bisect()
    return [box[:i] + [a] + box[i + 1:], box[:i] + [b] + box[i + 1:]]


def compose_cellular(outer: CellularMap, inner: CellularMap, check: bool = True) -> CellularMap:
    """``outer o inner`` on inner's cell.

    With ``check`` set, the inner image is verified to lie in the outer cell:
    interval coordinates must stay in ``[0, 1]`` and point coordinates must
    vanish identically.
    """
    if inner.cell.length != outer.cell.length:
        raise ImageEscapesDomain(
            f"inner map lands in R^{inner.cell.length}, outer cell has length {outer.cell.length}")
    if check:
        for i, (k, c) in enumerate(zip(outer.cell.kinds, inner.coords)):
            if k == POINT:
                if _clean(c) != ZERO:
                    v = enclose(c, inner.cell.box()) if not has_rootof(c) else None
                    if v is None or v != Interval(0):
                        raise ImageEscapesDomain(f"coordinate {i + 1} must vanish on the outer cell")
            else:
                ok = _range_within(c, inner.cell, 0, 1)
                if ok is not True:
                    raise ImageEscapesDomain(
                        f"coordinate {i + 1} {'leaves' if ok is False else 'is not certified inside'} (0, 1)")
    mapping = {i + 1: c for i, c in enumerate(inner.coords)}
    return CellularMap(inner.cell, tuple(_clean(substitute(c, mapping)) for c in outer.coords))


@dataclass
class CellularCheck:
    status: str  # "Ok", "Violation" or "Undecided"
    coordinate: Optional[int] = None
    box: Optional[List[Interval]] = None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "Ok"


def check_cellular(m: CellularMap, max_depth: int = 40, margin=MARGIN) -> CellularCheck:
    """Triangularity plus strict monotonicity in the own variable, certified on boxes.

    The positivity of ``d f_i / d x_i`` is checked on the cell shrunk by
    ``margin`` in every interval factor.
    """
    kinds = m.cell.kinds
    for i, c in enumerate(m.coords, start=1):
        extra = [j for j in variables(c) if j > i]
        if extra:
            return CellularCheck("Violation", i, None, f"coordinate {i} depends on x{extra[0]}")
    for i, c in enumerate(m.coords, start=1):
        if kinds[i - 1] != FULL:
            continue
        alpha = tuple(1 if j == i - 1 else 0 for j in range(len(kinds)))
        root = _clip(m.cell.box(), kinds, margin)
        stack = [(root, 0)]
        while stack:
            box, depth = stack.pop()
            try:
                d = jet_eval(c, box, 1)[alpha]
            except (GuardViolation, ZeroDivisionError):
                d = None
            if d is not None and d.lo > 0:
                continue
            if d is not None and d.hi <= 0:
                return CellularCheck("Violation", i, box, f"d f{i}/d x{i} <= 0 on a box")
            mid = [Interval(b.mid()) for b in box]
            try:
                dm = jet_eval(c, mid, 1)[alpha]
                if dm.hi <= 0:
                    return CellularCheck("Violation", i, mid, f"d f{i}/d x{i} <= 0 at a point")
            except (GuardViolation, ZeroDivisionError):
                pass
            if depth >= max_depth:
                return CellularCheck("Undecided", i, box, "subdivision limit reached")
            stack.extend((ch, depth + 1) for ch in _split(box, kinds))
    return CellularCheck("Ok")


def linear_subdivision(m: CellularMap, k: int) -> List[CellularMap]:
    """Precompose with the ``k^d`` affine contractions of the grid on the cell."""
    if k < 1:
        raise ValueError("subdivision factor must be positive")
    if k == 1:
        return [m]
    full = m.cell.full_indices()
    out = []
    for shifts in product(range(k), repeat=len(full)):
        mapping = {}
        for i, s in zip(full, shifts):
            mapping[i + 1] = affine(mpq(s, k), mpq(1, k), Var(i + 1))
        coords = tuple(_clean(substitute(c, mapping)) for c in m.coords)
        out.append(CellularMap(m.cell, coords))
    return out


def _as_interval(y) -> Interval:
    if isinstance(y, Interval):
        return y
    if isinstance(y, tuple):
        return Interval(*y)
    if isinstance(y, float):
        return Interval(Q(y))
    return Interval(Q(y))


def _solve_increasing(f, target: float, lo: float = 0.0, hi: float = 1.0) -> Optional[float]:
    """Float bisection for ``f(t) = target`` with ``f`` increasing on (lo, hi)."""
    eps = 1e-15
    flo, fhi = f(lo + eps), f(hi - eps)
    if math.isnan(flo) or math.isnan(fhi):
        # shrink away from endpoints where the branch may be missing
        a, b = lo, hi
        for _ in range(60):
            a = (a + lo + eps) / 2 if math.isnan(flo) else a
            b = (b + hi - eps) / 2 if math.isnan(fhi) else b
            flo, fhi = f(a if math.isnan(flo) else lo + eps), f(b if math.isnan(fhi) else hi - eps)
            if not (math.isnan(flo) or math.isnan(fhi)):
                break
        else:
            return None
    if target < flo or target > fhi:
        return None
    a, b = lo, hi
    for _ in range(80):
        mid = (a + b) / 2
        v = f(mid)
        if math.isnan(v):
            return None
        if v < target:
            a = mid
        else:
            b = mid
        if b - a < 1e-17:
            break
    return (a + b) / 2


def invert_point(m: CellularMap, y: Sequence, tol=mpq(1, 2**30)) -> Optional[List[Interval]]:
    """A box of width <= ``tol`` per interval factor containing a preimage of ``y``.

    ``y`` entries may be rationals, floats or tight Intervals.  Returns None when
    ``y`` is not certified to lie in the image.
    """
    tol = Q(tol)
    ys = [_as_interval(v) for v in y]
    kinds = m.cell.kinds
    box: List[Interval] = []
    approx: List[float] = []
    for i, (k, c) in enumerate(zip(kinds, m.coords)):
        rest = [Interval(0)] * (len(kinds) - i - 1)
        target = ys[i]
        if k == POINT:
            try:
                v = enclose(c, box + [Interval(0)] + rest)
            except (GuardViolation, ZeroDivisionError):
                return None
            if not v.intersects(target):
                return None
            box.append(Interval(0))
            approx.append(0.0)
            continue

        def f(t, i=i, c=c):
            return eval_float(c, approx + [t] + [0.0] * (len(kinds) - i - 1))

        t = _solve_increasing(f, float(target.mid()))
        if t is None:
            return None
        tq = Q(t)
        delta = tol / 2
        found = None
        for _ in range(12):
            a, b = max(tq - delta, mpq(0)), min(tq + delta, mpq(1))
            try:
                below = a == 0 or enclose(c, box + [Interval(a)] + rest).hi < target.lo
                above = b == 1 or enclose(c, box + [Interval(b)] + rest).lo > target.hi
            except (GuardViolation, ZeroDivisionError):
                below = above = False
            if below and above and (a > 0 or b < 1):
                found = Interval(a, b)
                break
            delta *= 4
        if found is None:
            return None
        if found.lo == 0 or found.hi == 1:
            # endpoint of the closed factor is not in the open cell; confirm inside
            try:
                v = enclose(c, box + [found] + rest)
            except (GuardViolation, ZeroDivisionError):
                return None
            if not v.intersects(target):
                return None
        box.append(found)
        approx.append(float(found.mid()))
    return box


@dataclass
class Piece:
    """One chart of a parametrization, with optional pulled-back functions."""

    map: CellularMap
    pullbacks: Tuple[Expr, ...] = ()
    certificates: list = field(default_factory=list)

    def to_sexpr(self) -> list:
        out = ["piece", self.map.to_sexpr()]
        if self.pullbacks:
            out.append(["pullbacks", *[to_sexpr(p) for p in self.pullbacks]])
        if self.certificates:
            out.append(["certificates", *[c.digest() for c in self.certificates]])
        return out


@dataclass
class Parametrization:
    r: int
    pieces: List[Piece]
    target: str = ""
    trace: list = field(default_factory=list)

    @property
    def maps(self) -> List[CellularMap]:
        return [p.map for p in self.pieces]

    def __len__(self) -> int:
        return len(self.pieces)

    def all_certified(self) -> bool:
        return all(p.certificates and all(c.passed for c in p.certificates) for p in self.pieces)

    def to_sexpr(self) -> list:
        return ["parametrization", ["r", str(self.r)], ["target", f'"{self.target}"'],
                *[p.to_sexpr() for p in self.pieces]]

    def to_text(self) -> str:
        return "\n  ".join([dumps(self.to_sexpr()[:3])[:-1]] + [dumps(p.to_sexpr()) for p in self.pieces]) + ")"

    @classmethod
    def from_text(cls, text: str) -> "Parametrization":
        return cls.from_sexpr(parse(text))

    @classmethod
    def from_sexpr(cls, form) -> "Parametrization":
        if head(form) != "parametrization":
            raise ParseError("expected (parametrization ...)", 0)
        r, target, pieces = 0, "", []
        for item in form[1:]:
            tag = head(item)
            if tag == "r":
                r = int(item[1])
            elif tag == "target":
                target = str(item[1])
            elif tag == "piece":
                m = CellularMap.from_sexpr(item[1])
                pulls: Tuple[Expr, ...] = ()
                for extra in item[2:]:
                    if head(extra) == "pullbacks":
                        pulls = tuple(from_sexpr(p) for p in extra[1:])
                pieces.append(Piece(m, pulls))
            else:
                raise ParseError(f"unknown parametrization entry {tag!r}", getattr(item, "pos", 0))
        return cls(r, pieces, target)

    def digest(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:16]


__all__ = [
    "FULL", "POINT", "BasicCell", "CellularMap", "CellularCheck", "ImageEscapesDomain", "Parametrization",
    "Piece", "check_cellular", "compose_cellular", "invert_point", "linear_subdivision",
]
