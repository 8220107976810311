from __future__ import annotations

import pytest

from conftest import EPIDEMIC_CORPUS, MOGHADAS_FIX, bundled
from epikit.equilibria import (
    EquilibriumError,
    classify,
    dfe,
    fixed_points_numeric,
    rur_reduce,
)
from epikit.modeldsl import parse_model
from epikit.symalg import RationalFunction, divides, parse_poly, parse_rational, real_roots, subs_rational

ISOLATED = [n for n in EPIDEMIC_CORPUS if n not in ("hethcote_closed", "sirvs7", "sirvs5", "sirfs")]


# disease-free equilibria -----------------------------------------------------------------


def test_dfe_hethcote():
    (sol,) = dfe(bundled("hethcote"))
    assert sol.to_strings() == {"s": "1", "i": "0", "r": "0"}


def test_dfe_moghadas_figure_parameters(moghadas):
    m = moghadas.substitute_params({**MOGHADAS_FIX, "beta": "0.32"})
    (sol,) = dfe(m)
    assert sol.evaluate({}) == {"s": 4.0, "i": 0.0}


@pytest.mark.parametrize("name", ["hethcote_closed", "sirvs7", "sirvs5", "sirfs"])
def test_conservation_models_have_non_isolated_dfe(name):
    with pytest.raises(EquilibriumError, match="non-isolated"):
        dfe(bundled(name))


def test_dfe_requires_infectious_set():
    with pytest.raises(EquilibriumError):
        dfe(bundled("lorenz"))


@pytest.mark.parametrize("name", ISOLATED)
def test_dfe_solves_rhs_exactly(name):
    m = bundled(name)
    for sol in dfe(m):
        assert set(sol.as_dict()) <= set(m.state_vars)
        for p in m.rhs:
            assert sol.apply(p).is_zero()


@pytest.mark.parametrize("name", ["hethcote", "seir", "sair", "jin"])
def test_dfe_invariant_under_equation_permutation(name):
    m = bundled(name)
    perm = list(reversed(range(m.n)))
    a = dfe(m)
    b = dfe(m.reorder(perm))
    assert [s.as_dict() for s in a] == [s.as_dict() for s in b]


def test_dfe_nonlinear_boundary_system():
    src = "model q\nvars s i\ninfectious i\neq s' = 4 - s^2 - s*i\neq i' = i*(s - 1)\n"
    sols = dfe(parse_model(src))
    assert [s.evaluate({}) for s in sols] == [{"s": 2.0, "i": 0.0}]


def test_dfe_irrational_symbolic_boundary_rejected():
    src = "model q\nvars s i\nparams a\ninfectious i\neq s' = a - s^2 - s*i\neq i' = i*(s - 1)\n"
    with pytest.raises(EquilibriumError, match="no rational solution form"):
        dfe(parse_model(src))


# univariate reduction -----------------------------------------------------------------------


def test_rur_seir_endemic_is_linear():
    r = rur_reduce(bundled("seir"), "e")
    assert r.removed_power >= 1
    assert r.degree == 1


def test_rur_hethcote_endemic_root():
    r = rur_reduce(bundled("hethcote"), "i")
    assert r.removed_power == 1 and r.degree == 1
    cs = r.cofactor.coeffs_in("i")
    root = RationalFunction(-cs[0], cs[1])
    assert root == parse_rational("lam*(beta - lam - gam)/(beta*(lam + gam))")
    # back-substitution reproduces s* = (lam + gam)/beta on the endemic branch
    s_star = r.back_subs["s"].subs({"i": root})
    assert s_star == parse_rational("(lam + gam)/beta")


def test_rur_moghadas_quadratic(moghadas_beta):
    r = rur_reduce(moghadas_beta, "i")
    assert r.degree == 2
    hand = parse_poly("20*beta*i^2 - 11*beta*i - 4*beta + 5/4")
    ratio = RationalFunction(r.cofactor, hand)
    assert ratio.is_constant()


def test_rur_back_substitutions_vanish(moghadas_beta):
    r = rur_reduce(moghadas_beta, "i")
    for p in moghadas_beta.rhs:
        num = subs_rational(p, {"s": r.back_subs["s"]}).num
        assert num.is_zero() or divides(r.univariate, num)


def test_rur_positive_dimensional_fails():
    with pytest.raises(EquilibriumError, match="not isolated"):
        rur_reduce(bundled("hethcote_closed"), "i")


# numeric fixed points -------------------------------------------------------------------------


def test_moghadas_endemic_focus(moghadas):
    m = moghadas.substitute_params({**MOGHADAS_FIX, "beta": "0.32"})
    pts = fixed_points_numeric(m, {})
    interior = [p for p in pts if p.interior]
    e2 = max(interior, key=lambda p: p.coordinates[1])
    assert e2.coordinates == pytest.approx((1.208, 0.5584), abs=5e-4)
    ev = sorted(e2.jacobian_eigenvalues, key=lambda z: z.imag)
    assert ev[1].real == pytest.approx(0.01782, abs=1e-3)
    assert ev[1].imag == pytest.approx(0.711, abs=1e-3)
    assert e2.classification == "unstable"


def test_moghadas_dfe_saddle(moghadas):
    m = moghadas.substitute_params({**MOGHADAS_FIX, "beta": "0.32"})
    (e0,) = [p for p in fixed_points_numeric(m, {}) if not p.interior]
    assert e0.coordinates == pytest.approx((4.0, 0.0), abs=1e-12)
    ev = sorted(z.real for z in e0.jacobian_eigenvalues)
    assert ev[0] == pytest.approx(-0.25, abs=1e-12)
    assert ev[1] == pytest.approx(0.03, abs=1e-3)
    assert ev[0] < 0 < ev[1]


def test_hethcote_subthreshold_only_dfe():
    m = bundled("hethcote")
    pts = fixed_points_numeric(m, {"beta": 0.5, "gam": 0.3, "lam": 0.4})
    assert [p.coordinates for p in pts] == [pytest.approx((1.0, 0.0, 0.0))]
    assert pts[0].classification == "stable"


@pytest.mark.parametrize("beta, count", [(0.2, 0), (0.25, 2), (0.3, 2), (0.35, 1)])
def test_moghadas_interior_counts_match_cofactor_roots(moghadas_beta, beta, count):
    m = moghadas_beta.substitute_params({"beta": str(beta)})
    pts = fixed_points_numeric(m, {})
    interior = [p for p in pts if p.interior]
    assert len(interior) == count
    cof = rur_reduce(moghadas_beta, "i").cofactor.subs({"beta": str(beta)})
    # i in (0, 4/5) keeps s = 4 - 5 i positive
    positive = [r for r in real_roots(cof, (0, 1)) if 0 < r.value < 0.8]
    assert len(positive) == count
    for p in pts:
        assert p.residual <= 1e-9


@pytest.mark.parametrize("eigs, label", [
    ([-1, -2], "stable"),
    ([1, -2], "unstable"),
    ([1j, -1j], "center-candidate"),
    ([0, -1], "degenerate"),
])
def test_classify(eigs, label):
    assert classify([complex(e) for e in eigs]) == label
