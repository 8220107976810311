from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import EPIDEMIC_CORPUS, bundled
from epikit.cli import bundled_models
from epikit.modeldsl import (
    Model,
    check_hungarian,
    kinetic_decomposition,
    parse_model,
    print_model,
)
from epikit.symalg import ParseError, Polynomial, parse_poly

HETHCOTE_SRC = """\
model hethcote
vars s i r
params beta gam lam
infectious i
eq s' = -beta*s*i + lam*(1 - s)
eq i' = i*(beta*s - (lam + gam))
eq r' = gam*i - lam*r
"""


def test_parse_hethcote_counts():
    m = parse_model(HETHCOTE_SRC)
    assert m.name == "hethcote"
    assert m.state_vars == ("s", "i", "r")
    assert m.params == ("beta", "gam", "lam")
    assert m.infectious_vars == ("i",)
    assert m.rhs[0] == parse_poly("-beta*s*i + lam - lam*s")


def test_parse_superinfection_model():
    m = bundled("moghadas")
    assert m.state_vars == ("s", "i")
    assert m.params == ("lam", "b", "beta", "betaxi", "gt")


def test_equations_in_any_order():
    src = "model t\nvars x y\nparams k\neq y' = x\neq x' = -k*x\n"
    m = parse_model(src)
    assert m.rhs[0] == parse_poly("-k*x")
    assert m.rhs[1] == parse_poly("x")


@pytest.mark.parametrize("src, fragment, line", [
    ("model a\nvars x\nparams k\neq x' = -k*y\n", "unknown symbol 'y'", 4),
    ("model a\nvars x x\neq x' = 1\n", "duplicate variable 'x'", 2),
    ("model a\nvars x\nparams k\nparams k\neq x' = 1\n", "duplicate parameter 'k'", 4),
    ("model a\nvars x\neq x' = 1 +\n", "unexpected", 3),
    ("model a\nvars x\neq x' = 1\neq x' = 2\n", "second equation", 4),
    ("model a\nvars x\nfoo bar\n", "unknown statement", 3),
    ("model a\nvars x\ninfectious z\neq x' = 1\n", "not a state variable", 3),
])
def test_parse_errors(src, fragment, line):
    with pytest.raises(ParseError) as e:
        parse_model(src)
    assert fragment in str(e.value)
    assert e.value.line == line


def test_equation_count_mismatch():
    with pytest.raises(ParseError, match="missing equation"):
        parse_model("model a\nvars x y\neq x' = 1\n")


def test_comments_and_blank_lines_ignored():
    m = parse_model("# header\n\nmodel a  # name\nvars x\n\neq x' = -x  # decay\n")
    assert m.rhs[0] == parse_poly("-x")


def test_model_invariants():
    m = bundled("seir")
    assert len(m.rhs) == len(m.state_vars)
    for p in m.rhs:
        assert p.free_symbols <= set(m.state_vars) | set(m.params)
    with pytest.raises(ValueError):
        Model("bad", ("x",), (), (Polynomial.const(0), Polynomial.const(0)))


# printing ----------------------------------------------------------------------------------


@pytest.mark.parametrize("name", bundled_models())
def test_print_parse_roundtrip(name):
    m = bundled(name)
    again = parse_model(print_model(m))
    assert again == m
    assert print_model(again) == print_model(m)


monomial = st.tuples(st.integers(0, 2), st.integers(0, 2), st.integers(0, 1))
rhs_poly = st.dictionaries(monomial, st.fractions(min_value=-3, max_value=3, max_denominator=4), max_size=4)


@settings(max_examples=40, deadline=None)
@given(st.lists(rhs_poly, min_size=2, max_size=2))
def test_print_parse_roundtrip_random(terms):
    gens = ("x", "y", "k")
    rhs = tuple(Polynomial(gens, t) for t in terms)
    m = Model("rand", ("x", "y"), ("k",), rhs, (1,))
    assert parse_model(print_model(m)) == m


# Hungarian lemma -----------------------------------------------------------------------------


def test_lorenz_single_cross_effect():
    rep = check_hungarian(bundled("lorenz"))
    assert not rep.ok
    assert len(rep.violations) == 1
    eq, term = rep.violations[0]
    assert eq == 1
    assert term == parse_poly("-x*z")


@pytest.mark.parametrize("name", EPIDEMIC_CORPUS)
def test_epidemic_corpus_has_no_cross_effects(name):
    rep = check_hungarian(bundled(name))
    assert rep.ok and rep.violations == ()


def test_constant_negative_term_flagged():
    rep = check_hungarian(parse_model("model a\nvars x\neq x' = -1\n"))
    assert not rep.ok
    assert rep.violations[0][1] == Polynomial.const(-1)


def test_report_ok_iff_no_violations():
    for name in bundled_models():
        rep = check_hungarian(bundled(name))
        assert rep.ok == (len(rep.violations) == 0)


# kinetic decomposition --------------------------------------------------------------------


def test_decomposition_linear_decay():
    kd = kinetic_decomposition(parse_model("model a\nvars x\neq x' = -x\n"))
    assert kd.Y == ((1,),)
    assert kd.S.to_strings() == [["-1"]]


def test_decomposition_closed_sir_rank_two():
    kd = kinetic_decomposition(bundled("hethcote_closed"))
    assert sorted(kd.monomial_strings()) == ["i", "r", "s*i"]
    assert kd.rank() == 2


def test_decomposition_open_sir():
    # lam*(1 - s) contributes the constant and s monomials
    kd = kinetic_decomposition(bundled("hethcote"))
    assert sorted(kd.monomial_strings()) == ["1", "i", "r", "s", "s*i"]
    assert kd.rank() == 3


@pytest.mark.parametrize("name", bundled_models())
def test_decomposition_reconstructs_rhs(name):
    m = bundled(name)
    kd = kinetic_decomposition(m)
    assert len(set(kd.Y)) == len(kd.Y)
    for k in range(kd.n_columns):
        assert not all(v.is_zero() for v in kd.S.col(k))
    for got, want in zip(kd.reconstruct(), m.rhs):
        assert got == want
