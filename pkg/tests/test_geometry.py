from __future__ import annotations

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from conftest import EPIDEMIC_CORPUS, bundled
from epikit.geometry import geometry_objects, upper_square_sum, yang_mills_energy
from epikit.modeldsl import Model, parse_model
from epikit.sirph import build_sirph
from epikit.symalg import Polynomial, RationalFunction, SymMatrix, as_rational, parse_poly, parse_rational

SIR_NO_LOSS = "model sir\nvars i s\nparams beta gam\neq i' = beta*s*i - gam*i\neq s' = -beta*s*i\n"


def test_sir_yang_mills_energy():
    g = geometry_objects(parse_model(SIR_NO_LOSS))
    assert g.EYM == parse_rational("beta^2*(i + s)^2/4")


def test_sir_torsions():
    g = geometry_objects(parse_model(SIR_NO_LOSS))
    half = Fraction(1, 2)
    want = SymMatrix([[0, parse_poly("beta")], [parse_poly("-beta"), 0]]).scale(-half)
    assert g.R_lagrange == (want, want)
    assert g.R_hamilton == (want.scale(-2), want.scale(-2))


def test_sir_lagrangian_and_hamiltonian():
    g = geometry_objects(parse_model(SIR_NO_LOSS))
    assert g.L == parse_poly("(y1 - beta*s*i + gam*i)^2 + (y2 + beta*s*i)^2")
    assert g.H == parse_poly("(p1^2 + p2^2)/4 + (beta*s*i - gam*i)*p1 - beta*s*i*p2")


def test_symmetric_linear_system_has_trivial_connection():
    m = parse_model("model l\nvars x y\nparams a b c\neq x' = a*x + b*y\neq y' = b*x + c*y\n")
    g = geometry_objects(m)
    assert g.N_lagrange.is_zero()
    assert g.EYM.is_zero()
    assert all(R.is_zero() for R in g.R_lagrange + g.R_hamilton)


def test_auxiliary_names_avoid_collisions():
    m = parse_model("model c\nvars y1 x\neq y1' = -y1\neq x' = y1\n")
    g = geometry_objects(m)
    assert not set(g.y_vars) & set(m.gens)
    assert not set(g.p_vars) & set(m.gens)


@pytest.mark.parametrize("name", EPIDEMIC_CORPUS + ["lorenz"])
def test_corpus_invariants(name):
    g = geometry_objects(bundled(name))
    assert g.invariant_failures() == []
    assert g.EYM == yang_mills_energy(g.N_lagrange)


def test_sirph_block_connection():
    # closed-form connection of the staged model with gamma_r = 0
    from test_sirph import SAIR

    spec = SAIR
    n = spec.n
    m = build_sirph(spec)
    g = geometry_objects(m)
    s = as_rational(Polynomial.var("s"))
    iv = [as_rational(Polynomial.var(f"i{k + 1}")) for k in range(n)]
    B, V, beta = spec.B, spec.V, spec.beta
    top = (B.T() - B).scale(s) - (V.T() - V)
    rows = []
    for j in range(n):
        BTi = sum((B[k, j] * iv[k] for k in range(n)), RationalFunction(0))
        rows.append(top.row(j) + [BTi + s * beta[j]])
    iB = [sum((iv[k] * B[k, j] for k in range(n)), RationalFunction(0)) for j in range(n)]
    rows.append([-s * beta[j] - iB[j] for j in range(n)] + [RationalFunction(0)])
    want = SymMatrix(rows).scale(Fraction(-1, 2))
    idx = list(range(n + 1))
    assert g.N_lagrange.submatrix(idx, idx) == want


# random fields ------------------------------------------------------------------------------


coef = st.integers(-3, 3)
poly2 = st.dictionaries(st.tuples(st.integers(0, 2), st.integers(0, 2)), coef, max_size=3)


@settings(max_examples=30, deadline=None)
@given(poly2, poly2)
def test_random_field_identities(t1, t2):
    gens = ("x", "y")
    m = Model("r", gens, (), (Polynomial(gens, t1), Polynomial(gens, t2)))
    g = geometry_objects(m)
    assert g.invariant_failures() == []


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-4, 4), min_size=3, max_size=3))
def test_skew_energy_identity(vals):
    a, b, c = vals
    N = SymMatrix([[0, a, b], [-a, 0, c], [-b, -c, 0]])
    assert yang_mills_energy(N) == upper_square_sum(N) == a * a + b * b + c * c
