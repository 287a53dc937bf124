"""Certified bounds on normalized C^r norms over open basic cells."""

from __future__ import annotations

import hashlib
import math
import time
from dataclasses import dataclass, field
from itertools import product
from typing import Dict, List, Optional, Sequence, Tuple

from gmpy2 import mpq

from ..algebra.poly import Q, Rational, format_rational
from ..jets.expr import Expr, to_text
from ..jets.interval import Interval, hull_all
from ..jets.jet import MAX_ORDER, GuardViolation, jet_eval, multi_indices

MARGIN = mpq(1, 2**40)
DEFAULT_MAX_DEPTH = 40

PASS, FAIL, UNDECIDED = "Pass", "Fail", "Undecided"


@dataclass
class Certificate:
    """Outcome of checking ``max_alpha sup |D^alpha e| / alpha! <= threshold``.

    ``bounds`` maps each multi-index (over the cell's full coordinates) to an
    interval holding the supremum: its upper end is rigorous whenever the
    verdict is Pass; its lower end is witnessed by point evaluations.
    """

    subject: str
    r: int
    verdict: str
    threshold: Rational = mpq(1)
    bounds: Dict[Tuple[int, ...], Interval] = field(default_factory=dict)
    witness: Optional[Tuple[List[Interval], Tuple[int, ...], Interval]] = None
    depth: int = 0
    boxes: int = 0
    seconds: float = 0.0
    leaves: List[Tuple[Tuple[Rational, Rational], ...]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    @property
    def bound(self) -> Rational:
        """Certified upper bound on the normalized norm (meaningful on Pass)."""
        return max((iv.hi for iv in self.bounds.values()), default=mpq(0))

    def digest(self) -> str:
        h = hashlib.sha256()
        h.update(self.subject.encode())
        h.update(f"|{self.r}|{self.verdict}|{format_rational(self.threshold)}|".encode())
        for leaf in self.leaves:
            h.update(";".join(f"{format_rational(a)},{format_rational(b)}" for a, b in leaf).encode())
            h.update(b"/")
        return h.hexdigest()[:16]

    def to_sexpr(self) -> list:
        out = ["certificate", ["digest", self.digest()], ["verdict", self.verdict], ["r", str(self.r)],
               ["threshold", format_rational(self.threshold)], ["depth", str(self.depth)],
               ["boxes", str(self.boxes)], ["subject", f'"{self.subject}"']]
        out.append(["bounds", *[[["alpha", *map(str, a)], format_rational(iv.lo), format_rational(iv.hi)]
                                for a, iv in sorted(self.bounds.items())]])
        if self.witness is not None:
            box, alpha, enc = self.witness
            out.append(["witness", ["box", *[[format_rational(b.lo), format_rational(b.hi)] for b in box]],
                        ["alpha", *map(str, alpha)], [format_rational(enc.lo), format_rational(enc.hi)]])
        out.append(["leaves", *[[[format_rational(a), format_rational(b)] for a, b in leaf]
                                for leaf in self.leaves]])
        return out


def cell_alphas(kinds: Sequence[str], r: int) -> List[Tuple[int, ...]]:
    """Multi-indices of order <= r that only differentiate full coordinates."""
    return [a for a in multi_indices(len(kinds), r)
            if all(k == "I" or e == 0 for k, e in zip(kinds, a))]


def _root_box(kinds) -> List[Interval]:
    return [Interval(0, 1) if k == "I" else Interval(0) for k in kinds]


def _clip(box: Sequence[Interval], kinds, margin) -> Optional[List[Interval]]:
    out = []
    for b, k in zip(box, kinds):
        if k != "I":
            out.append(b)
            continue
        lo, hi = max(b.lo, margin), min(b.hi, 1 - margin)
        if lo > hi:
            return None
        out.append(Interval(lo, hi))
    return out


def _in_shell(box, kinds, margin) -> bool:
    return any(k == "I" and (b.hi <= margin or b.lo >= 1 - margin) for b, k in zip(box, kinds))


def _touches_boundary(box, kinds) -> bool:
    return any(k == "I" and (b.lo == 0 or b.hi == 1) for b, k in zip(box, kinds))


def _split(box: Sequence[Interval], kinds):
    widths = [b.width if k == "I" else -1 for b, k in zip(box, kinds)]
    i = widths.index(max(widths))
    a, b = box[i].bisect()
    return [list(box[:i]) + [a] + list(box[i + 1:]), list(box[:i]) + [b] + list(box[i + 1:])]


def _jet_on(e: Expr, box, kinds, r, margin):
    """Jet over the closed box, falling back to the margin-clipped box."""
    try:
        return jet_eval(e, box, r), box
    except (GuardViolation, ZeroDivisionError):
        if not _touches_boundary(box, kinds):
            raise
    clipped = _clip(box, kinds, margin)
    if clipped is None:
        return None, None
    return jet_eval(e, clipped, r), clipped


def _monotone_ranges(e: Expr, box, kinds, r, alphas, bad) -> Dict[Tuple[int, ...], Interval]:
    """Exact coefficient ranges where a coefficient is monotone in every full coordinate.

    ``d/dx_i (D^a f / a!) = (a_i + 1) D^(a+e_i) f / (a+e_i)!``, so an order ``r + 1``
    jet decides monotonicity; the range is then the hull of the corner values.
    """
    if r + 1 > MAX_ORDER:
        return {}
    try:
        high = jet_eval(e, box, r + 1)
    except (GuardViolation, ZeroDivisionError):
        return {}
    full = [i for i, k in enumerate(kinds) if k == "I"]
    monotone = []
    for a in bad:
        ok = True
        for i in full:
            g = high[tuple(v + (j == i) for j, v in enumerate(a))]
            if g.lo < 0 < g.hi:
                ok = False
                break
        if ok:
            monotone.append(a)
    if not monotone:
        return {}
    out: Dict[Tuple[int, ...], Interval] = {}
    try:
        corners = [jet_eval(e, [Interval(c) for c in corner], r)
                   for corner in product(*[(b.lo, b.hi) for b in box])]
    except (GuardViolation, ZeroDivisionError):
        return {}
    for a in monotone:
        out[a] = hull_all(j[a] for j in corners)
    return out


def certify_norm(e: Expr, kinds: Sequence[str] = ("I",), r: int = 1, max_depth: int = DEFAULT_MAX_DEPTH,
                 threshold=1, margin=MARGIN, keep_leaves: bool = True,
                 alphas: Optional[Sequence[Tuple[int, ...]]] = None) -> Certificate:
    """Certify ``max_{|alpha|<=r} sup |D^alpha e| / alpha! <= threshold`` on the open cell.

    Boxes are bisected adaptively.  A box passes when every coefficient
    enclosure has magnitude <= threshold; the run fails as soon as some
    coefficient is certified above the threshold on a box or at a point.
    Boxes touching the cell boundary that cannot be evaluated in closed form
    are clipped to stay ``margin`` away from it.  Undecided boxes inside the
    shell of width ``margin`` are dropped, so the shell is only probed.
    ``alphas`` restricts the check to the given multi-indices.
    """
    t0 = time.perf_counter()
    kinds = tuple(kinds)
    threshold = Q(threshold)
    alphas = cell_alphas(kinds, r) if alphas is None else [tuple(a) for a in alphas]
    cert = Certificate(to_text(e), r, PASS, threshold)
    lower: Dict[Tuple[int, ...], Rational] = {a: mpq(0) for a in alphas}
    upper: Dict[Tuple[int, ...], Rational] = {a: mpq(0) for a in alphas}

    def probe(point) -> Optional[Tuple[Tuple[int, ...], Interval]]:
        try:
            jet = jet_eval(e, [Interval(p) for p in point], r)
        except (GuardViolation, ZeroDivisionError):
            return None
        hit = None
        for a in alphas:
            c = jet[a]
            lower[a] = max(lower[a], c.mig())
            if c.mig() > threshold and hit is None:
                hit = (a, c)
        return hit

    root = _root_box(kinds)
    for corner in product(*[(b.lo, b.hi) for b in root]):
        hit = probe(corner)
        if hit:
            cert.verdict, cert.witness = FAIL, ([Interval(c) for c in corner], hit[0], hit[1])
            break

    stack = [(root, 0)] if cert.verdict == PASS else []
    while stack:
        box, depth = stack.pop()
        cert.boxes += 1
        cert.depth = max(cert.depth, depth)
        try:
            jet, used = _jet_on(e, box, kinds, r, margin)
        except (GuardViolation, ZeroDivisionError):
            jet, used = "guard", None
        if jet is None:
            continue
        decided = jet != "guard"
        if decided:
            coeffs = {a: jet[a] for a in alphas}
            bad = [a for a in alphas if coeffs[a].mag() > threshold]
            if bad:
                coeffs.update(_monotone_ranges(e, used, kinds, r, alphas, bad))
            for a in bad:
                if coeffs[a].mag() > threshold:
                    decided = False
                    # witnesses come from plain box jets so they can be replayed
                    if jet[a].mig() > threshold:
                        cert.verdict, cert.witness = FAIL, (used, a, jet[a])
                        break
            if cert.verdict == FAIL:
                break
        if decided:
            for a in alphas:
                upper[a] = max(upper[a], coeffs[a].mag())
            if keep_leaves:
                cert.leaves.append(tuple((b.lo, b.hi) for b in used))
            continue
        mid = [b.mid() for b in box]
        hit = probe(mid)
        if hit:
            cert.verdict = FAIL
            cert.witness = ([Interval(m) for m in mid], hit[0], hit[1])
            break
        if _in_shell(box, kinds, margin):
            continue
        if depth >= max_depth:
            cert.verdict = UNDECIDED
            cert.witness = (box, (), Interval(0)) if jet == "guard" else (used, (), Interval(0))
            break
        for child in _split(box, kinds):
            stack.append((child, depth + 1))

    for a in alphas:
        hi = upper[a] if cert.verdict == PASS else max(upper[a], lower[a])
        cert.bounds[a] = Interval(min(lower[a], hi), hi)
    cert.seconds = time.perf_counter() - t0
    return cert


def certify_map_norm(coords: Sequence[Expr], kinds: Sequence[str], r: int, **kw) -> List[Certificate]:
    return [certify_norm(c, kinds, r, **kw) for c in coords]


def measure_norm(e: Expr, kinds: Sequence[str], r: int, cap: int = 10**6, **kw) -> Tuple[int, Certificate]:
    """Smallest integer K with a Pass certificate at threshold K, and that certificate."""
    k = 1
    while k <= cap:
        cert = certify_norm(e, kinds, r, threshold=k, **kw)
        if cert.passed:
            return k, cert
        if cert.verdict == FAIL and cert.witness is not None:
            # the witness bounds the norm from below
            k = max(k + 1, math.ceil(cert.witness[2].mig()))
        else:
            # undecided at the depth limit: grow geometrically
            k = max(k + 1, (3 * k) // 2)
    raise RuntimeError(f"norm of {to_text(e)[:80]} exceeds {cap}")
