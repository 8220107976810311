from __future__ import annotations

import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import EPIDEMIC_CORPUS, bundled
from epikit.crn import CrnError, CrnGraph, crn_stats, rational_rank, to_crn
from epikit.modeldsl import Model, parse_model
from epikit.symalg import Polynomial


def _reactions(g: CrnGraph) -> set[tuple[str, str, str]]:
    return {(g.label(r.source), g.label(r.product), str(r.rate)) for r in g.reactions}


def test_closed_sir_network():
    g = to_crn(bundled("hethcote_closed"))
    st_ = crn_stats(g)
    assert (st_["n_V"], st_["linkage_classes"], st_["stoich_rank"], st_["deficiency"]) == (5, 2, 2, 1)
    assert _reactions(g) == {("s+i", "2i", "beta"), ("i", "s", "lam"), ("i", "r", "gam"), ("r", "s", "lam")}
    assert not st_["weakly_reversible"]


def test_sirvs5_keeps_parallel_reactions():
    st_ = crn_stats(to_crn(bundled("sirvs5")))
    assert (st_["n_V"], st_["n_R"], st_["deficiency"]) == (5, 6, 1)
    rs = [(r["source"], r["product"]) for r in st_["reactions"]]
    assert rs.count(("r", "s")) == 2


def test_sirvs7_counts():
    st_ = crn_stats(to_crn(bundled("sirvs7")))
    assert (st_["n_V"], st_["n_R"], st_["n_s"], st_["linkage_classes"], st_["stoich_rank"], st_["deficiency"]) \
        == (6, 7, 5, 2, 2, 2)


def test_open_sir_has_zero_complex():
    g = to_crn(bundled("hethcote"))
    assert ("0", "s", "lam") in _reactions(g)
    assert crn_stats(g)["stoich_rank"] == 3


def test_linear_decay_is_deficiency_zero():
    g = to_crn(parse_model("model a\nvars x\neq x' = -x\n"))
    assert _reactions(g) == {("x", "0", "1")}
    assert crn_stats(g)["deficiency"] == 0


def test_empty_network():
    st_ = crn_stats(to_crn(parse_model("model a\nvars x y\neq x' = 0\neq y' = 0\n")))
    assert (st_["n_V"], st_["n_R"], st_["linkage_classes"], st_["deficiency"]) == (0, 0, 0, 0)


def test_stoichiometric_scale_is_primitive():
    g = to_crn(parse_model("model a\nvars x y\nparams k\neq x' = -2*k*x^2\neq y' = k*x^2\n"))
    assert _reactions(g) == {("2x", "y", "k")}


def test_lorenz_not_realizable():
    with pytest.raises(CrnError, match="not mass-action"):
        to_crn(bundled("lorenz"))


@pytest.mark.parametrize("name", EPIDEMIC_CORPUS)
def test_reconstruction_identity(name):
    m = bundled(name)
    g = to_crn(m)
    for got, want in zip(g.reconstruct(), m.rhs):
        assert got == want


@pytest.mark.parametrize("name", EPIDEMIC_CORPUS)
def test_deficiency_formula_and_rank_oracle(name):
    g = to_crn(bundled(name))
    st_ = crn_stats(g)
    if not g.reactions:
        return
    vecs = np.array([r.vector for r in g.reactions], dtype=float)
    assert st_["stoich_rank"] == np.linalg.matrix_rank(vecs)
    assert st_["deficiency"] == st_["n_V"] - st_["linkage_classes"] - st_["stoich_rank"] >= 0


@pytest.mark.parametrize("name", ["hethcote", "sirvs7", "sair", "seir"])
def test_equation_order_independence(name):
    m = bundled(name)
    rng = random.Random(5)
    perm = list(range(m.n))
    rng.shuffle(perm)
    a = crn_stats(to_crn(m))
    b = crn_stats(to_crn(m.reorder(perm)))
    for key in ("n_V", "n_R", "n_s", "linkage_classes", "stoich_rank", "deficiency"):
        assert a[key] == b[key]


def test_dot_output():
    dot = to_crn(bundled("hethcote_closed")).to_dot("sir")
    assert dot.startswith('digraph "sir" {')
    assert '"s+i" -> "2i" [label="beta"];' in dot
    assert dot.count("->") == 4


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-3, 3), min_size=3, max_size=3), max_size=5))
def test_rational_rank_matches_numpy(rows):
    expected = int(np.linalg.matrix_rank(np.array(rows, dtype=float))) if rows else 0
    assert rational_rank(rows) == expected


monomial = st.tuples(st.integers(0, 2), st.integers(0, 2))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(monomial, monomial, st.integers(1, 4)), min_size=1, max_size=4,
                unique_by=lambda r: r[0]))
def test_random_mass_action_roundtrip(rxns):
    # one reaction per source: same-source, same-rate reactions are merged by design
    gens = ("x", "y")
    rhs = [Polynomial.const(0, gens), Polynomial.const(0, gens)]
    for src, prod, k in rxns:
        flux = Polynomial.monomial(gens, src) * k
        for j in range(2):
            rhs[j] = rhs[j] + flux * (prod[j] - src[j])
    m = Model("r", gens, (), tuple(rhs))
    g = to_crn(m)
    for got, want in zip(g.reconstruct(), m.rhs):
        assert got == want
