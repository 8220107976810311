"""Exact symbolic kernel: polynomials, rational functions, matrices, Groebner bases, roots."""

from .polynomial import Polynomial, as_fraction, divides, exquo, symbols
from .ratfunc import RationalFunction, as_rational, poly_gcd, subs_rational
from .parsing import ParseError, parse_poly, parse_rational
from .matrix import SymMatrix, bareiss_det, charpoly, diagonal_blocks, factor_blocks
from .groebner import (
    DEFAULT_BUDGET,
    GroebnerBudgetExceeded,
    elimination_part,
    gb_lex,
    is_groebner,
    reduce,
    s_polynomial,
)
from .roots import RealRoot, count_roots, real_roots, sign_variations, sturm_sequence, to_dense

__all__ = [
    "Polynomial", "RationalFunction", "SymMatrix", "RealRoot", "ParseError",
    "GroebnerBudgetExceeded", "DEFAULT_BUDGET",
    "as_fraction", "as_rational", "bareiss_det", "charpoly", "count_roots", "diagonal_blocks",
    "divides", "elimination_part", "exquo", "factor_blocks", "gb_lex", "is_groebner",
    "parse_poly", "parse_rational", "poly_gcd", "real_roots", "reduce", "s_polynomial",
    "sign_variations", "sturm_sequence", "subs_rational", "symbols", "to_dense",
]
