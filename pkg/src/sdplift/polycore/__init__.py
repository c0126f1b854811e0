"""Exact polynomial arithmetic, parsing, calculus and lattice geometry."""

from .lattice import (
    LatticeSet,
    half_hull_lattice,
    in_convex_hull,
    monomial_basis,
    sort_grlex,
    support,
)
from .parse import (
    NegativeExponentError,
    PolynomialParseError,
    PolynomialSyntaxError,
    UnknownIdentifierError,
    canonical_names,
    format_polynomial,
    parse_constraint,
    parse_polynomial,
)
from .polynomial import (
    Exponent,
    Polynomial,
    add_exponents,
    evaluate,
    evaluate_matrix,
    gradient,
    grlex_key,
    hessian,
    unit,
    zero_exponent,
)
from .semialgebraic import SemialgebraicSet

__all__ = [
    "Exponent",
    "LatticeSet",
    "NegativeExponentError",
    "Polynomial",
    "PolynomialParseError",
    "PolynomialSyntaxError",
    "SemialgebraicSet",
    "UnknownIdentifierError",
    "add_exponents",
    "canonical_names",
    "evaluate",
    "evaluate_matrix",
    "format_polynomial",
    "gradient",
    "grlex_key",
    "half_hull_lattice",
    "hessian",
    "in_convex_hull",
    "monomial_basis",
    "parse_constraint",
    "parse_polynomial",
    "sort_grlex",
    "support",
    "unit",
    "zero_exponent",
]
