"""Jacobians, next-generation matrices and reproduction thresholds.

Two thresholds are computed:

* ``R_N`` from the gradient decomposition ``M = F - V`` of the infectious
  block Jacobian and the spectral radius of ``K = F V^{-1}`` at the DFE;
* ``R_J`` from the factorization of the characteristic polynomial of the
  full Jacobian at the DFE. Factors whose non-constant coefficients are of
  one sign but whose constant coefficient ``c0 = c+ - c-`` is not give
  ``R_J = c- / c+``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .equilibria import Substitution, dfe
from .modeldsl import Model, model_jacobian
from .sampling import DEFAULT_SEED, positive_draws
from .symalg import Polynomial, RationalFunction, SymMatrix, as_rational, charpoly, factor_blocks

N_COMPARE_DRAWS = 20


class ThresholdError(RuntimeError):
    """Analysis failure in the NGM or Jacobian-factorization pipeline."""


# sign helpers ------------------------------------------------------------------------


def sign_class(p: Polynomial) -> int | None:
    """Syntactic sign of ``p`` for positive symbols.

    Returns ``1`` when every coefficient is positive, ``-1`` when every one
    is negative, ``0`` for the zero polynomial and ``None`` when mixed.
    """
    if isinstance(p, RationalFunction):
        p = p.as_polynomial()
    if p.is_zero():
        return 0
    signs = {c > 0 for c in p.terms.values()}
    if signs == {True}:
        return 1
    if signs == {False}:
        return -1
    return None


def positive_part(p: Polynomial) -> Polynomial:
    """Monomials of ``p`` with positive rational coefficient."""
    return Polynomial(p.gens, {e: c for e, c in p.terms.items() if c > 0})


def negative_part(p: Polynomial) -> Polynomial:
    """Negated monomials of ``p`` with negative coefficient, so ``p = pos - neg``."""
    return Polynomial(p.gens, {e: -c for e, c in p.terms.items() if c < 0})


def _rf_sign(v: RationalFunction) -> int | None:
    sn, sd = sign_class(v.num), sign_class(v.den)
    if sn is None or sd is None:
        return None
    return sn * sd


# Jacobian ------------------------------------------------------------------------------


def jacobian(m: Model, at: Substitution | Mapping[str, object] | None = None) -> SymMatrix:
    """Symbolic Jacobian ``d rhs_i / d x_j``, optionally evaluated at a point."""
    J = model_jacobian(m)
    if at is None:
        return J
    mapping = at.as_dict() if isinstance(at, Substitution) else dict(at)
    return J.subs(mapping)


def unique_dfe(m: Model) -> Substitution:
    sols = dfe(m)
    if len(sols) != 1:
        raise ThresholdError(f"expected a unique DFE, found {len(sols)}")
    return sols[0]


# next generation matrix -------------------------------------------------------------


@dataclass(frozen=True)
class NgmResult:
    """Gradient decomposition of the infectious block.

    ``M``, ``V1``, ``F1``, ``F`` and ``V`` depend on the state variables;
    ``F_dfe`` and ``V_dfe`` are evaluated at the DFE and ``K = F_dfe V_dfe^{-1}``.
    """

    infectious: tuple[str, ...]
    M: SymMatrix
    V1: SymMatrix
    F1: SymMatrix
    F: SymMatrix
    V: SymMatrix
    F_dfe: SymMatrix
    V_dfe: SymMatrix
    K: SymMatrix
    dfe_used: Substitution


def ngm(m: Model, at: Substitution | None = None) -> NgmResult:
    """Next-generation matrix by the positive-part recipe.

    Parameters
    ----------
    m : Model
        Model with a declared infectious set.
    at : Substitution, optional
        DFE to use; computed (and required to be unique) when omitted.

    Raises
    ------
    ThresholdError
        No infectious set, non-unique DFE or singular ``V``.
    """
    if not m.infectious:
        raise ThresholdError("NGM needs a declared infectious set")
    point = at if at is not None else unique_dfe(m)
    idx = list(m.infectious)
    inf_vars = m.infectious_vars
    others = [v for v in m.state_vars if v not in inf_vars]
    J = model_jacobian(m)
    M = J.submatrix(idx, idx)
    zero_others = {v: 0 for v in others}
    V1 = (-M).map(lambda v: v.num.subs(zero_others) / v.den)
    F1 = M + V1
    F = F1.map(lambda v: positive_part(v.as_polynomial()))
    V = F - M
    zero_inf = {v: 0 for v in inf_vars}
    mapping = dict(point.as_dict())
    mapping.update({v: as_rational(0) for v in inf_vars})
    F_d = F.subs(zero_inf).subs(mapping)
    V_d = V.subs(zero_inf).subs(mapping)
    if V_d.det().is_zero():
        raise ThresholdError("V not invertible at the DFE")
    K = F_d @ V_d.inverse()
    return NgmResult(tuple(inf_vars), M, V1, F1, F, V, F_d, V_d, K, point)


@dataclass(frozen=True)
class SpectralRadius:
    """Outcome of :func:`r0_ngm`.

    ``value`` is ``None`` when the spectral radius could not be resolved;
    ``charpoly`` is the characteristic polynomial of ``K`` times the cleared
    denominator, i.e. of ``P`` with ``K = P / q``.
    """

    value: RationalFunction | None
    method: str
    charpoly: Polynomial
    denominator: Polynomial
    candidates: tuple[RationalFunction, ...] = ()

    @property
    def resolved(self) -> bool:
        return self.value is not None


def _dominant(cands: Sequence[RationalFunction], seed: int, draws: int = N_COMPARE_DRAWS):
    """Candidate that is largest at every random positive draw, else ``None``."""
    if len(cands) == 1:
        return cands[0]
    names = sorted(set().union(*(c.free_symbols for c in cands)))
    winner = None
    for vals in positive_draws(names, draws, seed):
        nums = [float(c.evaluate(vals)) for c in cands]
        k = max(range(len(nums)), key=lambda j: nums[j])
        if winner is None:
            winner = k
        elif winner != k:
            return None
    return cands[winner]


def r0_ngm(r: NgmResult, indet: str = "u", seed: int = DEFAULT_SEED) -> SpectralRadius:
    """Spectral radius of ``K`` as a rational function of the parameters.

    Rank-one ``K`` gives ``trace(K)``. Otherwise linear factors of the
    characteristic polynomial are split off; among roots that are ratios of
    positive-coefficient polynomials the one dominating at random positive
    draws is returned. Anything else is reported as unresolved.
    """
    K = r.K
    P, q = K.cleared()
    Pm = SymMatrix(P)
    cp = charpoly(Pm, indet)
    if K.minors2_vanish():
        return SpectralRadius(K.trace(), "rank-one", cp, q, (K.trace(),))
    roots = []
    for f in factor_blocks(Pm, indet):
        if f.degree(indet) != 1:
            continue
        cs = f.coeffs_in(indet)
        lead = cs[1]
        c0 = cs.get(0, Polynomial.const(0, f.gens))
        root = RationalFunction(-c0, lead * q)
        if not root.is_zero() and _rf_sign(root) == 1:
            roots.append(root)
    if roots:
        best = _dominant(roots, seed)
        if best is not None:
            return SpectralRadius(best, "linear-factors", cp, q, tuple(roots))
    return SpectralRadius(None, "unresolved", cp, q, tuple(roots))


# Jacobian factorization ---------------------------------------------------------------


@dataclass(frozen=True)
class FactorInfo:
    """One factor of the DFE characteristic polynomial and its classification.

    ``kind`` is ``negative-linear``, ``descartes``, ``sign-definite`` or
    ``indefinite``. ``c_plus`` and ``c_minus`` split the constant coefficient
    (after normalising the leading coefficient to be positive).
    """

    poly: Polynomial
    kind: str
    c_plus: Polynomial | None = None
    c_minus: Polynomial | None = None

    @property
    def ratio(self) -> RationalFunction | None:
        if self.c_plus is None or self.c_minus is None or self.c_plus.is_zero():
            return None
        return RationalFunction(self.c_minus, self.c_plus)


@dataclass(frozen=True)
class JacFactReport:
    """Factors of the DFE Jacobian characteristic polynomial and the derived ``R_J``.

    ``R_J`` is ``None`` when no factor yields a threshold or when several
    candidates are incomparable at random positive draws. ``relaxed`` marks
    that no factor was strictly Descartes and candidates were taken from
    factors with a sign-changing constant coefficient only.
    """

    factors: tuple[FactorInfo, ...]
    per_factor_RJ: tuple[RationalFunction, ...]
    R_J: RationalFunction | None
    relaxed: bool
    scale: Polynomial
    dfe_used: Substitution
    diagnostic: str = ""


def classify_factor(f: Polynomial, indet: str = "u") -> FactorInfo:
    cs = f.coeffs_in(indet)
    d = f.degree(indet)
    lead_sign = sign_class(cs[d])
    if lead_sign is None:
        return FactorInfo(f, "indefinite")
    if lead_sign < 0:
        cs = {k: -v for k, v in cs.items()}
    zero = Polynomial.const(0, f.gens)
    c0 = cs.get(0, zero)
    higher = [sign_class(cs.get(k, zero)) for k in range(1, d + 1)]
    s0 = sign_class(c0)
    cp, cm = positive_part(c0), negative_part(c0)
    if d == 1 and s0 == 1:
        return FactorInfo(f, "negative-linear", cp, cm)
    if s0 == 0:
        return FactorInfo(f, "indefinite", cp, cm)
    if all(h == 1 for h in higher):
        if s0 is None:
            return FactorInfo(f, "descartes", cp, cm)
        return FactorInfo(f, "sign-definite", cp, cm)
    return FactorInfo(f, "indefinite", cp, cm)


def r0_jacfact(m: Model, at: Substitution | None = None, indet: str = "u",
               seed: int = DEFAULT_SEED) -> JacFactReport:
    """Jacobian-factorization threshold ``R_J`` at the DFE.

    The DFE Jacobian is scaled by the common denominator of its entries
    (positive for positive parameters when the DFE is) so that factors have
    polynomial coefficients.
    """
    point = at if at is not None else unique_dfe(m)
    J = jacobian(m, point)
    P, q = J.cleared()
    factors = tuple(classify_factor(f, indet) for f in factor_blocks(SymMatrix(P), indet))
    strict = [f for f in factors if f.kind == "descartes"]
    relaxed = False
    chosen = strict
    if not strict:
        chosen = [f for f in factors if f.kind == "indefinite" and f.c_plus is not None
                  and not f.c_plus.is_zero() and not f.c_minus.is_zero()]
        relaxed = bool(chosen)
    ratios = tuple(f.ratio for f in chosen if f.ratio is not None)
    if not ratios:
        return JacFactReport(factors, (), None, False, q, point,
                             "no factor with a sign-changing constant coefficient")
    best = _dominant(list(ratios), seed)
    diag = "" if best is not None else "candidates are incomparable at random positive draws"
    return JacFactReport(factors, ratios, best, relaxed, q, point, diag)


# numeric threshold checks -----------------------------------------------------------------


def dfe_infectious_abscissa(m: Model, point: Substitution, values: Mapping[str, object]) -> float:
    """Largest real part among eigenvalues of the infectious block at the DFE."""
    import numpy as np

    J = jacobian(m, point)
    idx = list(m.infectious)
    block = J.submatrix(idx, idx).to_numpy(values)
    return float(max(np.linalg.eigvals(block).real))


def threshold_values(r: SpectralRadius | JacFactReport, values: Mapping[str, object]) -> float | None:
    v = r.value if isinstance(r, SpectralRadius) else r.R_J
    return None if v is None else float(v.evaluate(values))
