"""Command line front end.

Problem documents are s-expressions::

    (problem (kind set1d) (r 2)
      (constraint "x*y - 1/100" =0))

``kind`` is one of set1d, set2d, fn1d, fn2d, family, obstruction.  Constraint
polynomials are infix strings in x, y (and the family parameter) or
``(poly ...)`` forms.  Functions of one variable are listed as components::

    (component (polynomial "x1^2"))
    (component (branch "y^2 - x" 0 [lo hi]))

and a function on the square as ``(function <expr>)`` in the expression text
format, or ``(function (infix "x1*x2"))`` for polynomials.  Families add
``(parameter l)`` and optionally ``(lambda 1/100)`` or ``(lambda-grid ...)``.

Exit codes: 0 success, 1 a check did not pass, 2 malformed input, 3 pipeline error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence

import mpmath
from gmpy2 import mpq

from .algebra.factor import parse_infix
from .algebra.sexpr import ParseError, dumps, head, parse_all, parse_rational, poly_from_sexpr
from .cells import Parametrization
from .certify import check_cover
from .jets.expr import from_poly, from_sexpr, simplify
from .obstruction import THETA, scan
from .param1d import RELATIONS, PiecewiseAlgebraicFunction, SemialgebraicSet2D, parametrize_curve, \
    parametrize_function_1d, certify_pieces
from .param2d import FamilyProblem, family_partition, parametrize_family, parametrize_function_2d, \
    parametrize_set_2d

KINDS = ("set1d", "set2d", "fn1d", "fn2d", "family", "obstruction")


@dataclass
class Problem:
    kind: str
    r: int = 2
    constraints: list = field(default_factory=list)
    components: list = field(default_factory=list)
    function: object = None
    parameter: str = "l"
    lam: Optional[mpq] = None
    lambda_grid: List[mpq] = field(default_factory=list)
    eps: dict = field(default_factory=dict)
    text: str = ""


def _err(message: str, form, text: str) -> ParseError:
    return ParseError(message, getattr(form, "pos", 0), text)


def _poly(form, names, text: str):
    if isinstance(form, list):
        return poly_from_sexpr(form).with_vars(names)
    try:
        return parse_infix(str(form), names)
    except Exception as exc:
        raise _err(f"bad polynomial {str(form)!r}: {exc}", form, text) from None


def _rational(form, text: str) -> mpq:
    return mpq(parse_rational(form))


def _float(form, text: str):
    try:
        return mpmath.mpf(str(form))
    except (ValueError, TypeError):
        raise _err(f"bad number {dumps(form)!r}", form, text) from None


def parse_problem(text: str) -> Problem:
    """Read a problem document; raises ParseError with the offending offset."""
    try:
        return _parse_problem(text)
    except ParseError as exc:
        raise ParseError(exc.message, exc.pos, text) from None


def _parse_problem(text: str) -> Problem:
    forms = parse_all(text)
    if len(forms) != 1 or head(forms[0]) != "problem":
        raise ParseError("expected a single (problem ...) form", 0, text)
    doc = forms[0]
    entries = {}
    for item in doc[1:]:
        if not isinstance(item, list):
            raise _err(f"unexpected atom {item!r}", item, text)
        entries.setdefault(head(item), []).append(item)
    kind_form = entries.get("kind")
    if not kind_form or len(kind_form[0]) != 2 or str(kind_form[0][1]) not in KINDS:
        raise _err(f"(kind ...) must be one of {', '.join(KINDS)}", kind_form[0] if kind_form else doc, text)
    prob = Problem(str(kind_form[0][1]), text=text)
    if "r" in entries:
        rf = entries["r"][0]
        if len(rf) != 2 or not str(rf[1]).isdigit() or not 1 <= int(rf[1]) <= 8:
            raise _err("r must be an integer in [1, 8]", rf, text)
        prob.r = int(rf[1])
    if "parameter" in entries:
        prob.parameter = str(entries["parameter"][0][1])
    names = (prob.parameter, "x", "y") if prob.kind == "family" else ("x", "y")
    for c in entries.get("constraint", []):
        if len(c) != 3 or str(c[2]) not in RELATIONS:
            raise _err(f"(constraint <poly> <rel>) with rel in {', '.join(RELATIONS)}", c, text)
        p = _poly(c[1], names, text)
        if p.is_zero():
            raise _err("constraint polynomial is zero", c, text)
        prob.constraints.append((p, str(c[2])))
    for c in entries.get("component", []):
        prob.components.append(_component(c, text))
    if "function" in entries:
        f = entries["function"][0]
        if len(f) != 2 or not isinstance(f[1], list):
            raise _err("(function <expr>)", f, text)
        if head(f[1]) == "infix":
            prob.function = simplify(from_poly(_poly(f[1][1], ("x1", "x2"), text)))
        else:
            prob.function = from_sexpr(f[1])
    if "lambda" in entries:
        prob.lam = _rational(entries["lambda"][0][1], text)
    if "lambda-grid" in entries:
        prob.lambda_grid = [_rational(v, text) for v in entries["lambda-grid"][0][1:]]
    for key in ("eps-min", "eps-max", "points"):
        if key in entries:
            prob.eps[key] = _float(entries[key][0][1], text)
    _validate(prob, doc)
    return prob


def _component(c, text: str) -> PiecewiseAlgebraicFunction:
    if len(c) != 2 or not isinstance(c[1], list):
        raise _err("(component (polynomial ...)) or (component (branch ...))", c, text)
    body = c[1]
    tag = head(body)
    if tag == "polynomial":
        p = _poly(body[1], ("x1",), text)
        bounds = [_rational(v, text) for v in body[2:4]] or [0, 1]
        return PiecewiseAlgebraicFunction.polynomial(p, *bounds)
    if tag == "branch":
        if len(body) < 3 or not str(body[2]).isdigit():
            raise _err("(branch <poly in x y> <index> [lo hi])", body, text)
        p = _poly(body[1], ("x", "y"), text)
        bounds = [_rational(v, text) for v in body[3:5]] or [0, 1]
        return PiecewiseAlgebraicFunction.branch(p, int(body[2]), *bounds)
    raise _err(f"unknown component {tag!r}", body, text)


def _validate(prob: Problem, doc) -> None:
    need = {"set1d": "constraints", "set2d": "constraints", "family": "constraints", "fn1d": "components"}
    attr = need.get(prob.kind)
    if attr and not getattr(prob, attr):
        raise _err(f"{prob.kind} problems need at least one {attr[:-1]}", doc, prob.text)
    if prob.kind == "fn2d" and prob.function is None:
        raise _err("fn2d problems need (function ...)", doc, prob.text)
    if prob.kind == "family":
        for p, _ in prob.constraints:
            if not p.involves(prob.parameter):
                raise _err(f"family polynomials must involve {prob.parameter}", doc, prob.text)


# pipelines

def _set(prob: Problem) -> SemialgebraicSet2D:
    return SemialgebraicSet2D(tuple(prob.constraints))


def _family(prob: Problem) -> FamilyProblem:
    return FamilyProblem(tuple(prob.constraints), prob.parameter)


def run_param(prob: Problem, r: int, max_depth: int) -> Parametrization:
    if prob.kind == "set1d":
        par, _ = parametrize_curve(_set(prob), r, certify=False)
    elif prob.kind == "set2d":
        par = parametrize_set_2d(_set(prob), r, certify=False)
    elif prob.kind == "fn1d":
        F = prob.components[0] if len(prob.components) == 1 else prob.components
        par = parametrize_function_1d(F, r, certify=False)
    elif prob.kind == "fn2d":
        par = parametrize_function_2d(prob.function, r, certify=False, max_depth=max_depth)
    elif prob.kind == "family":
        if prob.lam is None:
            raise ValueError("family param needs (lambda ...) in the document")
        par = parametrize_family(_family(prob), r, prob.lam, certify=False)
    else:
        raise ValueError(f"param does not apply to {prob.kind} problems")
    return certify_pieces(par, max_depth=max_depth)


def render(par: Parametrization) -> str:
    certs = ["certificates"]
    for i, piece in enumerate(par.pieces):
        certs.append(["piece", str(i), *[c.to_sexpr() for c in piece.certificates]])
    return par.to_text() + "\n" + dumps(certs) + "\n" + dumps(["trace", f'"{_trace_text(par.trace)}"']) + "\n"


def _trace_text(trace) -> str:
    return json.dumps(trace, sort_keys=True, default=str).replace("\\", "\\\\").replace('"', "'")


def _fmt(v) -> str:
    return mpmath.nstr(mpmath.mpf(v), 12, min_fixed=-mpmath.inf, max_fixed=mpmath.inf) if not isinstance(v, int) \
        else str(v)


def obstruction_csv(eps_min, eps_max, points: int) -> str:
    if not 0 < eps_min <= eps_max < mpmath.mpf(1) / 2 or points < 1:
        raise ValueError("need 0 < eps-min <= eps-max < 1/2 and points >= 1")
    if points == 1:
        grid = [mpmath.mpf(eps_max)]
    else:
        a, b = mpmath.log(eps_max), mpmath.log(eps_min)
        grid = [mpmath.exp(a + (b - a) * k / (points - 1)) for k in range(points)]
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["eps", "diam", "lower_bound", "cover_count", "ratio", "theta"])
    for row in scan(grid):
        w.writerow([_fmt(row.eps), _fmt(row.diam), row.lower_bound, row.cover_count, _fmt(row.ratio), _fmt(THETA)])
    return out.getvalue()


def family_csv(prob: Problem, grid: Sequence[mpq], r: int, max_depth: int) -> str:
    fam = _family(prob)
    intervals, points = family_partition(fam)
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["lambda", "piece", "pieces", "certified"])
    for lam in grid:
        where = next((f"{{{p}}}" for p in points if p == lam), None)
        if where is None:
            where = next(f"({a},{b})" for a, b in intervals if a < lam < b)
        par = parametrize_family(fam, r, lam, certify=False)
        certify_pieces(par, max_depth=max_depth)
        w.writerow([str(lam), where, len(par.pieces), "yes" if par.all_certified() else "no"])
    return out.getvalue()


# argument handling

def _write(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_problem(path: Optional[str]) -> Problem:
    if not path:
        raise ParseError("--input is required", 0)
    return parse_problem(Path(path).read_text())


def _grid_arg(text: str) -> List[mpq]:
    try:
        return [mpq(v.strip()) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ParseError(f"bad --lambda-grid value: {exc}", 0) from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cellparam", description="Certified cellular parametrizations.")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--input", help="problem document")
        p.add_argument("--out", help="output file (default stdout)")
        p.add_argument("--r", type=int, help="smoothness order (overrides the document)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-depth", type=int, default=40)
        return p

    common(sub.add_parser("param", help="parametrize and certify"))
    c = common(sub.add_parser("certify", help="re-verify a parametrization document"))
    c.add_argument("document", nargs="?", help="parametrization document (default --input)")
    f = common(sub.add_parser("family-scan", help="piece counts over a parameter grid (CSV)"))
    f.add_argument("--lambda-grid", help="comma separated rationals")
    o = common(sub.add_parser("obstruction-scan", help="eps grid -> diam, lower bound, cover count (CSV)"))
    o.add_argument("--eps-min", type=float)
    o.add_argument("--eps-max", type=float)
    o.add_argument("--points", type=int)
    v = common(sub.add_parser("cover-check", help="sample the set and invert through the pieces"))
    v.add_argument("--param", help="parametrization document (default: run param first)")
    v.add_argument("--samples", type=int, default=1000)
    return ap


def _dispatch(args) -> int:
    if args.command == "obstruction-scan":
        eps = _read_problem(args.input).eps if args.input else {}
        lo = args.eps_min if args.eps_min is not None else eps.get("eps-min", mpmath.mpf("1e-16"))
        hi = args.eps_max if args.eps_max is not None else eps.get("eps-max", mpmath.mpf("1e-2"))
        n = args.points if args.points is not None else int(eps.get("points", 15))
        _write(obstruction_csv(mpmath.mpf(lo), mpmath.mpf(hi), n), args.out)
        return 0
    if args.command == "certify":
        path = args.document or args.input
        if not path:
            raise ParseError("a parametrization document is required", 0)
        text = Path(path).read_text()
        par = Parametrization.from_sexpr(parse_all(text)[0])
        if args.r is not None:
            par.r = args.r
        certify_pieces(par, max_depth=args.max_depth)
        bad = [i for i, p in enumerate(par.pieces) if not all(c.passed for c in p.certificates)]
        _write(f"{len(par.pieces)} pieces, {len(par.pieces) - len(bad)} certified"
               + (f", failing: {bad}" if bad else "") + "\n", args.out)
        return 1 if bad else 0
    prob = _read_problem(args.input)
    r = args.r if args.r is not None else prob.r
    if args.command == "param":
        _write(render(run_param(prob, r, args.max_depth)), args.out)
        return 0
    if args.command == "family-scan":
        grid = _grid_arg(args.lambda_grid) if args.lambda_grid else prob.lambda_grid
        if not grid:
            raise ParseError("family-scan needs --lambda-grid or (lambda-grid ...)", 0)
        _write(family_csv(prob, grid, r, args.max_depth), args.out)
        return 0
    if args.command == "cover-check":
        if prob.kind not in ("set1d", "set2d", "fn1d", "family"):
            raise ValueError(f"cover-check does not apply to {prob.kind} problems")
        if args.param:
            par = Parametrization.from_sexpr(parse_all(Path(args.param).read_text())[0])
        else:
            par = run_param(prob, r, args.max_depth)
        if prob.kind == "fn1d":
            target = prob.components[0]
        elif prob.kind == "family":
            target = _family(prob).at(prob.lam)
        else:
            target = _set(prob)
        report = check_cover(par, target, args.samples, seed=args.seed)
        lines = [report.summary()] + [f"miss {' '.join(f'{v:.12g}' for v in m)}" for m in report.misses]
        _write("\n".join(lines) + "\n", args.out)
        return 0 if report.ok else 1
    raise ParseError(f"unknown command {args.command}", 0)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except ParseError as exc:
        print(f"error: parse: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pipeline failures are reported, not raised
        print(f"error: pipeline: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
