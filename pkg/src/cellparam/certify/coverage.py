"""Sampling a set and checking that a parametrization covers the samples."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from gmpy2 import mpq

from ..algebra.roots import AlgebraicNumber
from ..cad import decompose, roots_in_unit
from ..cells import POINT, invert_point
from ..jets.floats import eval_float
from ..jets.interval import Interval


class EmptySet(ValueError):
    pass


@dataclass
class CoverageReport:
    samples: int
    hits: int = 0
    sigma_matches: int = 0
    misses: List[tuple] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.misses

    def summary(self) -> str:
        return f"{self.samples} samples: {self.hits} hits, {self.sigma_matches} point cells, {len(self.misses)} misses"


_SCALE = 2**24


def _random_between(rng: random.Random, a: AlgebraicNumber, b: AlgebraicNumber) -> mpq:
    width = mpq(1, 2**40)
    while True:
        lo = a.interval(width)[1]
        hi = b.interval(width)[0]
        if lo < hi:
            for _ in range(8):
                x = lo + (hi - lo) * mpq(rng.randrange(1, _SCALE), _SCALE)
                if a < x < b:
                    return x
        width /= 2**20


def _cells(X) -> List[tuple]:
    """Cells of a cylindrical decomposition adapted to ``X`` that lie in ``X``.

    Each entry is ``(kind, data)``: ``("sector", (strip, lower, upper))``,
    ``("section", (strip, section))``, ``("segment", (x, lower, upper))`` or
    ``("point", (x, y))``.
    """
    dec = decompose(X.polys)
    zero, one = AlgebraicNumber(0), AlgebraicNumber(1)
    cells = []
    for strip in dec.strips:
        x = strip.sample
        secs = strip.sections
        ys = [s.sample_y for s in secs]
        bounds = [zero] + ys + [one]
        for k, (lo, hi) in enumerate(zip(bounds, bounds[1:])):
            if lo < hi and X.contains((x, _random_between(random.Random(0), lo, hi))):
                cells.append(("sector", (strip, secs[k - 1] if k else None, secs[k] if k < len(secs) else None)))
        for s in secs:
            if X.contains((x, s.sample_y)):
                cells.append(("section", (strip, s)))
    for fib in dec.fibers:
        bounds = [zero] + fib.points + [one]
        for lo, hi in zip(bounds, bounds[1:]):
            if X.contains((fib.x, _random_between(random.Random(0), lo, hi))):
                cells.append(("segment", (fib.x, lo, hi)))
        for y in fib.points:
            if X.contains((fib.x, y)):
                cells.append(("point", (fib.x, y)))
    return cells


def _section_at(section, x) -> AlgebraicNumber:
    ys = roots_in_unit(section.poly.subs({"x": x}).with_vars(("y",)))
    return ys[section.index]


def _draw(rng: random.Random, cell) -> tuple:
    kind, data = cell
    if kind == "point":
        return data
    if kind == "segment":
        x, lo, hi = data
        return (x, AlgebraicNumber(_random_between(rng, lo, hi)))
    strip = data[0]
    x = _random_between(rng, strip.lo, strip.hi)
    if kind == "section":
        return (AlgebraicNumber(x), _section_at(data[1], x))
    lower, upper = data[1], data[2]
    lo = _section_at(lower, x) if lower else AlgebraicNumber(0)
    hi = _section_at(upper, x) if upper else AlgebraicNumber(1)
    return (AlgebraicNumber(x), AlgebraicNumber(_random_between(rng, lo, hi)))


def sample_set(X, n: int, seed: int = 0) -> List[tuple]:
    """``n`` points of ``X`` with exact coordinates, spread over its cells.

    ``X`` is a SemialgebraicSet2D or a piecewise function (its domain is sampled).
    Point cells get one sample each; the remaining quota is shared round-robin
    among the cells of positive dimension.
    """
    rng = random.Random(seed)
    if hasattr(X, "pieces"):
        if not X.pieces:
            raise EmptySet("function has no pieces")
        return [(AlgebraicNumber(_random_between(rng, p.lo, p.hi)),)
                for p in (X.pieces[i % len(X.pieces)] for i in range(n))]
    cells = _cells(X)
    if not cells:
        raise EmptySet("the set has no points in the open square")
    points = [c for c in cells if c[0] == "point"][:n]
    rest = [c for c in cells if c[0] != "point"] or points
    out = [c[1] for c in points]
    i = 0
    while len(out) < n:
        pt = _draw(rng, rest[i % len(rest)])
        assert X.contains(pt)
        out.append(pt)
        i += 1
    return out


def _target(point, width=mpq(1, 2**60)) -> List[Interval]:
    out = []
    for v in point:
        v = v if isinstance(v, AlgebraicNumber) else AlgebraicNumber(v)
        out.append(Interval(*v.interval(width)))
    return out


def _range_of_first(m) -> Optional[Tuple[float, float]]:
    """Float range of the first interval coordinate, used to skip far pieces."""
    kinds = m.cell.kinds
    if kinds[0] == POINT:
        v = eval_float(m.coords[0], [0.0] * len(kinds))
        return (v, v)
    zeros = [0.0] * (len(kinds) - 1)
    a = eval_float(m.coords[0], [1e-12] + zeros)
    b = eval_float(m.coords[0], [1 - 1e-12] + zeros)
    return None if a != a or b != b else (a, b)


def check_cover(par, X, n: int = 1000, seed: int = 0, points: Optional[Sequence[tuple]] = None) -> CoverageReport:
    """Invert ``n`` sampled points of ``X`` through the pieces of ``par``."""
    pts = list(points) if points is not None else sample_set(X, n, seed)
    report = CoverageReport(len(pts))
    # point cells first so exceptional points are credited to them
    pieces = sorted(par.pieces, key=lambda p: p.map.cell.dim)
    ranges = [_range_of_first(p.map) for p in pieces]
    slack = 1e-9
    for pt in pts:
        target = _target(pt)
        x = float(target[0].mid())
        hit = None
        for piece, rg in zip(pieces, ranges):
            if len(piece.map.coords) != len(target):
                continue
            if rg is not None and not rg[0] - slack <= x <= rg[1] + slack:
                continue
            if invert_point(piece.map, target) is not None:
                hit = piece
                break
        if hit is None:
            report.misses.append(tuple(float(v) for v in pt))
        elif hit.map.cell.dim == 0:
            report.sigma_matches += 1
        else:
            report.hits += 1
    return report


__all__ = ["CoverageReport", "EmptySet", "check_cover", "sample_set"]
