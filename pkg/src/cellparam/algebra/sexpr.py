"""Minimal s-expression reader/writer and the polynomial text format.

Polynomials are written as::

    (poly (vars x y) (term 1 ((x 1) (y 1))) (term -1/4 ()))

Rationals are ``p/q`` strings without decimal points.
"""

from __future__ import annotations

import re
from typing import List, Union

from .poly import Poly, Q, format_rational

_TOKEN = re.compile(r"\s*(?:(;[^\n]*)|(\()|(\))|(\"(?:[^\"\\]|\\.)*\")|([^\s()\"]+))")


class ParseError(ValueError):
    """Malformed input; ``pos`` is the 0-based character offset."""

    def __init__(self, message: str, pos: int, text: str = ""):
        line = text.count("\n", 0, pos) + 1 if text else 1
        col = pos - (text.rfind("\n", 0, pos) + 1) if text else pos
        super().__init__(f"{message} at line {line}, column {col + 1} (offset {pos})")
        self.message = message
        self.pos = pos
        self.line = line
        self.column = col + 1


class Symbol(str):
    """Atom with the source offset it was read from."""

    pos: int = 0

    def __new__(cls, value: str, pos: int = 0):
        obj = super().__new__(cls, value)
        obj.pos = pos
        return obj


class SList(list):
    pos: int = 0


SExpr = Union[Symbol, SList]


def parse_all(text: str) -> List[SExpr]:
    stack: List[SList] = [SList()]
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            if text[pos:].strip() == "":
                break
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        comment, lpar, rpar, string, atom = m.groups()
        start = m.start(m.lastindex) if m.lastindex else pos
        pos = m.end()
        if comment:
            continue
        if lpar:
            lst = SList()
            lst.pos = start
            stack[-1].append(lst)
            stack.append(lst)
        elif rpar:
            if len(stack) == 1:
                raise ParseError("unbalanced ')'", start, text)
            stack.pop()
        elif string:
            stack[-1].append(Symbol(string[1:-1], start))
        elif atom:
            stack[-1].append(Symbol(atom, start))
    if len(stack) != 1:
        raise ParseError("missing ')'", stack[-1].pos, text)
    return list(stack[0])


def parse(text: str) -> SExpr:
    forms = parse_all(text)
    if len(forms) != 1:
        raise ParseError(f"expected one form, found {len(forms)}", 0, text)
    return forms[0]


def dumps(form) -> str:
    if isinstance(form, (list, tuple)):
        return "(" + " ".join(dumps(f) for f in form) + ")"
    return str(form)


def _pos(form) -> int:
    return getattr(form, "pos", 0)


def head(form) -> str:
    if not isinstance(form, list) or not form or isinstance(form[0], list):
        raise ParseError("expected a tagged list", _pos(form))
    return str(form[0])


def parse_rational(tok):
    if isinstance(tok, list) or not re.fullmatch(r"[+-]?\d+(/\d+)?", str(tok)):
        raise ParseError(f"bad rational {dumps(tok)!r}", _pos(tok))
    if "/" in tok and int(tok.split("/")[1]) == 0:
        raise ParseError("zero denominator", _pos(tok))
    return Q(str(tok))


def poly_from_sexpr(form) -> Poly:
    if head(form) != "poly":
        raise ParseError("expected (poly ...)", _pos(form))
    if len(form) < 2 or not isinstance(form[1], list) or head(form[1]) != "vars":
        raise ParseError("expected (vars ...) after poly", _pos(form))
    names = [str(v) for v in form[1][1:]]
    for v in form[1][1:]:
        if isinstance(v, list) or not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", v):
            raise ParseError(f"bad variable name {dumps(v)!r}", _pos(v))
    terms = {}
    for t in form[2:]:
        if head(t) != "term" or len(t) != 3 or not isinstance(t[2], list):
            raise ParseError("expected (term <rational> ((var exp) ...))", _pos(t))
        c = parse_rational(t[1])
        mono = [0] * len(names)
        for pair in t[2]:
            if not isinstance(pair, list) or len(pair) != 2:
                raise ParseError("expected (var exponent)", _pos(pair))
            name, e = str(pair[0]), pair[1]
            if name not in names:
                raise ParseError(f"unknown variable {name!r}", _pos(pair))
            if isinstance(e, list) or not str(e).isdigit():
                raise ParseError(f"bad exponent {dumps(e)!r}", _pos(pair))
            mono[names.index(name)] += int(e)
        key = tuple(mono)
        terms[key] = terms.get(key, 0) + c
    return Poly(names, terms)


def poly_to_sexpr(p: Poly) -> list:
    out = ["poly", ["vars", *p.vars]]
    for mono in sorted(p.terms, reverse=True):
        powers = [[v, str(e)] for v, e in zip(p.vars, mono) if e]
        out.append(["term", format_rational(p.terms[mono]), powers])
    return out


def format_poly(p: Poly) -> str:
    return dumps(poly_to_sexpr(p))


def read_poly(text: str) -> Poly:
    return poly_from_sexpr(parse(text))
