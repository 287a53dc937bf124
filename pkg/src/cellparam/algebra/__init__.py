"""Exact polynomial arithmetic, resultants and real root isolation."""

from .poly import Poly, Q, Rational, poly_derivative, poly_discriminant, poly_resultant
from .roots import AlgebraicNumber, IsolatingInterval, isolate_real_roots, real_roots, refine_root, sign_at
from .sexpr import ParseError, format_poly, read_poly

__all__ = [
    "AlgebraicNumber", "IsolatingInterval", "ParseError", "Poly", "Q", "Rational",
    "format_poly", "isolate_real_roots", "poly_derivative", "poly_discriminant",
    "poly_resultant", "read_poly", "real_roots", "refine_root", "sign_at",
]
