from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import bundled, fraction_det
from epikit.symalg import (
    GroebnerBudgetExceeded,
    ParseError,
    Polynomial,
    RationalFunction,
    SymMatrix,
    as_fraction,
    as_rational,
    charpoly,
    count_roots,
    elimination_part,
    exquo,
    factor_blocks,
    gb_lex,
    is_groebner,
    parse_poly,
    parse_rational,
    real_roots,
    reduce,
    sign_variations,
    sturm_sequence,
    symbols,
    to_dense,
)
from epikit.threshold import jacobian

GENS = ("x", "y")
small_exp = st.tuples(st.integers(0, 2), st.integers(0, 2))
small_poly = st.dictionaries(small_exp, st.integers(-5, 5), max_size=4).map(lambda t: Polynomial(GENS, t))


def P(text, gens=()):
    return parse_poly(text, gens)


# coefficients -------------------------------------------------------------------------


@pytest.mark.parametrize("value, expected", [
    (0.1, Fraction(1, 10)),
    ("3/6", Fraction(1, 2)),
    (-4, Fraction(-4)),
    (Fraction(6, -4), Fraction(-3, 2)),
])
def test_as_fraction_is_reduced(value, expected):
    f = as_fraction(value)
    assert f == expected
    assert f.denominator > 0
    assert math.gcd(f.numerator, f.denominator) == 1


def test_polynomial_drops_zero_coefficients():
    p = Polynomial(GENS, {(1, 0): 2, (0, 1): 0})
    assert list(p.terms) == [(1, 0)]
    assert (p - p).terms == {}


def test_exponent_length_checked():
    with pytest.raises(ValueError):
        Polynomial(GENS, {(1,): 1})


def test_lex_term_order_follows_declared_variables():
    p = P("y^3 + x*y + x^2", ("x", "y"))
    assert [e for e, _ in p.sorted_terms()] == [(2, 0), (1, 1), (0, 3)]


# ring laws ---------------------------------------------------------------------------------


@settings(max_examples=60, deadline=None)
@given(small_poly, small_poly, small_poly)
def test_ring_laws(p, q, r):
    assert (p + q) * r == p * r + q * r
    assert (p * q) * r == p * (q * r)
    assert (p + q) + r == p + (q + r)
    assert (p - p).is_zero()
    assert p * q == q * p


@settings(max_examples=40, deadline=None)
@given(small_poly, small_poly.filter(lambda q: not q.is_zero()))
def test_exact_division_inverts_product(p, q):
    assert exquo(p * q, q) == p


@settings(max_examples=40, deadline=None)
@given(small_poly, small_poly.filter(lambda q: not q.is_zero()), small_poly.filter(lambda q: not q.is_zero()))
def test_rational_function_cancels_common_factor(p, q, c):
    f = RationalFunction(p * c, q * c)
    assert f == RationalFunction(p, q)
    assert f.num.degree() + f.den.degree() <= (p * c).degree() + (q * c).degree()


def test_rational_function_reduces_univariate_gcd():
    f = RationalFunction(P("x^2 - 1"), P("x - 1"))
    assert f.is_polynomial()
    assert f.as_polynomial() == P("x + 1")


def test_rational_function_zero_denominator():
    with pytest.raises(ZeroDivisionError):
        RationalFunction(P("x"), Polynomial.const(0))


def test_rational_function_evaluate_and_subs():
    f = parse_rational("beta/(gam + lam)")
    assert f.evaluate({"beta": 3, "gam": 1, "lam": 2}) == 1
    g = f.subs({"beta": parse_rational("gam + lam")})
    assert g == 1


# parsing -----------------------------------------------------------------------------------


@pytest.mark.parametrize("text, expected", [
    ("(x + 1)^2", "x^2 + 2*x + 1"),
    ("-x*(2 - y)", "x*y - 2*x"),
    ("3/4*x - 1/4*x", "1/2*x"),
])
def test_parse_expands(text, expected):
    assert P(text, GENS) == P(expected, GENS)


@pytest.mark.parametrize("text", ["x +", "x * * 2", "(x + 1", "x ^ -1", "2 $ x"])
def test_parse_errors_report_position(text):
    with pytest.raises(ParseError) as e:
        parse_poly(text, GENS, set(GENS))
    assert "column" in str(e.value) or "line" in str(e.value)


def test_parse_unknown_symbol():
    with pytest.raises(ParseError, match="zeta"):
        parse_poly("x + zeta", GENS, set(GENS))


# Groebner bases ------------------------------------------------------------------------------


def test_gb_elimination_hand_substitution():
    s, i = symbols("s i")
    G = gb_lex([s + i - 1, i - 2 * s], keep_symbols=["i"], eliminate_symbols=["s"])
    part = elimination_part(G, ["s"])
    assert len(part) == 1
    assert part[0].compact().monic() == P("i - 2/3")


def test_gb_single_generator():
    (x,) = symbols("x")
    assert gb_lex([x], keep_symbols=["x"]) == [x]


def test_gb_eliminates_x():
    x, y = symbols("x y")
    G = gb_lex([x ** 2 - y, y - 1], keep_symbols=["y"], eliminate_symbols=["x"])
    assert [g.compact() for g in elimination_part(G, ["x"])] == [P("y - 1")]


def test_gb_empty():
    assert gb_lex([], keep_symbols=["x"]) == []


def test_gb_budget_exhausted():
    x, y, z = symbols("x y z")
    gens = [x ** 3 - y * z + 1, y ** 3 - x * z ** 2 + 2, z ** 3 - x * y + x - 3]
    with pytest.raises(GroebnerBudgetExceeded):
        gb_lex(gens, keep_symbols=["z"], eliminate_symbols=["x", "y"], budget=2)


def test_gb_rejects_undeclared_symbol():
    x, y = symbols("x y")
    with pytest.raises(ValueError):
        gb_lex([x + y], keep_symbols=["x"])


@settings(max_examples=25, deadline=None)
@given(st.lists(small_poly.filter(lambda p: not p.is_zero()), min_size=1, max_size=3))
def test_gb_properties(gens):
    G = gb_lex(gens, keep_symbols=["y"], eliminate_symbols=["x"])
    assert is_groebner(G)
    order = ("x", "y")
    for g in gens:
        assert reduce(g, G, order).is_zero()
    # auto-reduced: no leading monomial divides a term of another element
    lead = [g.leading_term(order)[0] for g in G]
    for k, g in enumerate(G):
        for j, e in enumerate(lead):
            if j != k:
                assert not any(all(a >= b for a, b in zip(t, e)) for t in g.with_gens(order).terms)


# characteristic polynomial ------------------------------------------------------------------


def test_charpoly_identity():
    u = Polynomial.var("u")
    assert charpoly(SymMatrix.identity(2), "u") == (u - 1) ** 2


def test_charpoly_companion():
    c0, c1 = P("c0"), P("c1")
    m = SymMatrix([[0, 1], [-c0, -c1]])
    assert charpoly(m, "u") == P("u^2 + c1*u + c0")


def test_charpoly_sair_v_is_triangular_product():
    V = SymMatrix([[P("ge + L"), 0], [P("-ei"), P("L + gi + d")]])
    assert charpoly(V, "u") == P("(u - (ge + L))*(u - (gi + L + d))")


def test_charpoly_non_square():
    with pytest.raises(ValueError):
        charpoly(SymMatrix([[1, 2]]), "u")


int_matrix = st.integers(2, 3).flatmap(
    lambda n: st.lists(st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n))


@settings(max_examples=60, deadline=None)
@given(int_matrix, st.fractions(min_value=-5, max_value=5, max_denominator=7))
def test_charpoly_matches_determinant_oracle(rows, t):
    n = len(rows)
    cp = charpoly(SymMatrix(rows), "u")
    assert cp.degree("u") == n
    assert cp.coeffs_in("u")[n] == Polynomial.const(1, cp.gens)
    shifted = [[(t if i == j else 0) - rows[i][j] for j in range(n)] for i in range(n)]
    assert cp.evaluate({"u": t}) == fraction_det(shifted)


# partial factorization ------------------------------------------------------------------------


def _product(fs):
    out = Polynomial.const(1)
    for f in fs:
        out = out * f
    return out


def test_factor_blocks_hethcote_dfe():
    m = bundled("hethcote")
    J = jacobian(m, {"s": 1, "i": 0, "r": 0})
    fs = factor_blocks(J, "u")
    expected = [P("u + lam"), P("u + lam"), P("u - (beta - lam - gam)")]
    assert Counter(fs) == Counter(expected)


def test_factor_blocks_diagonal():
    fs = factor_blocks(SymMatrix.diag([P("a"), P("b")]), "u")
    assert Counter(fs) == Counter([P("u - a"), P("u - b")])


def test_factor_blocks_dense_block_kept_whole():
    m = SymMatrix([[P("a"), P("b")], [P("c"), P("d")]])
    fs = factor_blocks(m, "u")
    assert len(fs) == 1 and fs[0].degree("u") == 2


@settings(max_examples=40, deadline=None)
@given(int_matrix.map(lambda r: [[v if (i >= j or (i + j) % 2) else 0 for j, v in enumerate(row)]
                                 for i, row in enumerate(r)]))
def test_factor_product_identity(rows):
    m = SymMatrix(rows)
    assert _product(factor_blocks(m, "u")) == charpoly(m, "u")


@pytest.mark.parametrize("model", ["hethcote", "sair", "slair", "moghadas", "seir", "jin"])
def test_factor_product_identity_on_dfe_jacobians(model):
    from epikit.threshold import unique_dfe

    m = bundled(model)
    J = jacobian(m, unique_dfe(m))
    Pm, q = J.cleared()
    M = SymMatrix(Pm)
    assert _product(factor_blocks(M, "u")) == charpoly(M, "u")


# real roots ---------------------------------------------------------------------------------


def test_real_roots_quadratic_formula():
    roots = real_roots(P("25*i^2 - 16*i + 1"), (0, 1))
    disc = math.sqrt(16 ** 2 - 4 * 25)
    expected = [(16 - disc) / 50, (16 + disc) / 50]
    assert [r.value for r in roots] == pytest.approx(expected, abs=1e-12)


def test_real_roots_rational_root_exact():
    (r,) = real_roots(P("u - 1"), (0, 2))
    assert r.value == 1.0
    assert r.hi - r.lo <= Fraction(1, 10 ** 12)


def test_real_roots_positive_root_of_endemic_quadratic():
    roots = real_roots(P("20*i^2 - 11*i - 0.09375"), (0, 1))
    assert len(roots) == 1
    assert roots[0].value == pytest.approx(0.5584, abs=5e-5)


def test_real_roots_multiplicity_and_boundary_zero():
    roots = real_roots(P("u^3 - 2*u^2 + u"), (0, 2))  # u (u - 1)^2
    assert [(r.value, r.multiplicity) for r in roots] == [(0.0, 1), (1.0, 2)]


def test_real_roots_zero_polynomial():
    with pytest.raises(ValueError):
        real_roots(Polynomial.const(0), (0, 1))


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(-6, 6), min_size=2, max_size=6).filter(lambda c: c[-1] != 0),
       st.integers(-8, 0), st.integers(1, 8))
def test_sturm_count_consistency(coeffs, lo, hi):
    a, _ = to_dense(coeffs)
    lo, hi = Fraction(lo), Fraction(hi)
    roots = real_roots(coeffs, (lo, hi))
    seq = sturm_sequence(a)
    # endpoints that are roots are nudged so the variation count stays well defined
    if any(r.exact in (lo, hi) for r in roots):
        return
    assert len(roots) == sign_variations(seq, lo) - sign_variations(seq, hi)
    assert len(roots) == count_roots(a, lo, hi)
    for r in roots:
        assert lo <= r.lo <= r.hi <= hi


def test_rational_roundtrip_as_rational():
    f = as_rational("1/3")
    assert f.is_constant() and f.constant_value() == Fraction(1, 3)
