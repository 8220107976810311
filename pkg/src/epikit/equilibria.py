"""Disease-free equilibria, Groebner-based univariate reduction, numeric fixed points."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .modeldsl import Model, model_jacobian
from .symalg import (
    Polynomial,
    RationalFunction,
    as_rational,
    elimination_part,
    exquo,
    gb_lex,
    real_roots,
    subs_rational,
)
from .symalg.groebner import DEFAULT_BUDGET
from .symalg.polynomial import as_fraction

ADMISSIBLE_EPS = 1e-12
NONNEG_TOL = 1e-9
RESIDUAL_TOL = 1e-9
CENTER_TOL = 1e-9


class EquilibriumError(RuntimeError):
    """Analysis failure: no solution, non-isolated solutions, or a failed reduction."""


@dataclass(frozen=True)
class Substitution:
    """Assignment of state variables to rational functions of the parameters."""

    assignments: Mapping[str, RationalFunction]

    def __getitem__(self, var: str) -> RationalFunction:
        return self.assignments[var]

    def as_dict(self) -> dict[str, RationalFunction]:
        return dict(self.assignments)

    def apply(self, p) -> RationalFunction:
        return subs_rational(p, self.assignments)

    def to_strings(self) -> dict[str, str]:
        return {k: str(v) for k, v in self.assignments.items()}

    def evaluate(self, values: Mapping[str, object]) -> dict[str, float]:
        return {k: float(v.evaluate(values)) for k, v in self.assignments.items()}


# disease-free equilibrium ----------------------------------------------------------


def _linear_solve(eqs: list[Polynomial], unknowns: Sequence[str]) -> list[RationalFunction]:
    """Solve a linear system over Q(params); raises on singular or inconsistent systems."""
    n = len(unknowns)
    rows = []
    for e in eqs:
        coeffs = [e.diff(u) for u in unknowns]
        const = e.subs({u: 0 for u in unknowns})
        rows.append([as_rational(c) for c in coeffs] + [as_rational(-const)])
    # Gaussian elimination on the augmented matrix
    r = 0
    pivots = []
    for c in range(n):
        piv = next((k for k in range(r, len(rows)) if not rows[k][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        p = rows[r][c]
        rows[r] = [v / p for v in rows[r]]
        for k in range(len(rows)):
            if k != r and not rows[k][c].is_zero():
                f = rows[k][c]
                rows[k] = [a - f * b for a, b in zip(rows[k], rows[r])]
        pivots.append(c)
        r += 1
    for k in range(r, len(rows)):
        if not rows[k][n].is_zero():
            raise EquilibriumError("no disease-free equilibrium: inconsistent boundary system")
    if r < n:
        free = [unknowns[c] for c in range(n) if c not in pivots]
        raise EquilibriumError(f"non-isolated DFE: {', '.join(free)} undetermined on the boundary")
    sol = [None] * n
    for k, c in enumerate(pivots):
        sol[c] = rows[k][n]
    return sol


def dfe(m: Model, budget: int = DEFAULT_BUDGET) -> list[Substitution]:
    """Disease-free equilibria.

    Infectious variables are set to zero and the remaining equations solved:
    exactly by linear algebra when they are linear in the non-infectious
    variables, otherwise through a lex Groebner basis (rational solutions
    only for symbolic parameters; numeric roots when all parameters are
    fixed). Numeric solutions with a negative coordinate are dropped.

    Raises
    ------
    EquilibriumError
        No infectious set, no solution, or a non-isolated boundary set.
    """
    if not m.infectious:
        raise EquilibriumError("DFE needs a declared infectious set")
    inf = set(m.infectious_vars)
    zero = {v: 0 for v in inf}
    unknowns = [v for v in m.state_vars if v not in inf]
    eqs = [p.subs(zero) for p in m.rhs]
    eqs = [e for e in eqs if not e.is_zero()]
    if not unknowns:
        if eqs:
            raise EquilibriumError("no disease-free equilibrium")
        return [Substitution({v: as_rational(0) for v in m.state_vars})]
    linear = all(sum(exp[e.gens.index(u)] for u in unknowns if u in e.gens) <= 1
                 for e in eqs for exp in e.terms)
    if linear:
        sol = _linear_solve(eqs, unknowns)
        assign = {v: as_rational(0) for v in m.state_vars}
        assign.update(dict(zip(unknowns, sol)))
        return [Substitution({v: assign[v] for v in m.state_vars})]
    return _nonlinear_dfe(m, eqs, unknowns, inf, budget)


def _nonlinear_dfe(m, eqs, unknowns, inf, budget) -> list[Substitution]:
    params = list(m.params)
    G = gb_lex(eqs, params, unknowns[::-1], budget)
    if any(g.is_constant() and not g.is_zero() for g in G):
        raise EquilibriumError("no disease-free equilibrium")
    if not params:
        pts = _triangular_solve(G, unknowns)
        out = []
        for pt in pts:
            if min(pt.values(), default=0.0) < -NONNEG_TOL:
                continue
            assign = {v: as_rational(0) for v in m.state_vars}
            for k, val in pt.items():
                assign[k] = as_rational(Fraction(val).limit_denominator(10 ** 12))
            out.append(Substitution({v: assign[v] for v in m.state_vars}))
        if not out:
            raise EquilibriumError("no non-negative disease-free equilibrium")
        return out
    # symbolic: require a triangular basis linear in each unknown
    assign: dict[str, RationalFunction] = {}
    for v in unknowns:
        cands = [g for g in G if g.degree(v) == 1 and not (g.free_symbols & (set(unknowns) - {v} - set(assign)))]
        if not cands:
            raise EquilibriumError("nonlinear DFE with symbolic parameters has no rational solution form")
        g = min(cands, key=lambda q: len(q.terms))
        a = g.coeffs_in(v).get(1)
        b = g.coeffs_in(v).get(0, Polynomial.const(0, g.gens))
        val = subs_rational(-b, assign) / subs_rational(a, assign)
        assign[v] = val
    full = {v: as_rational(0) for v in m.state_vars}
    full.update(assign)
    return [Substitution({v: full[v] for v in m.state_vars})]


# rational univariate reduction ------------------------------------------------------


@dataclass(frozen=True)
class RurResult:
    """Univariate reduction of the fixed-point ideal.

    ``univariate`` generates the elimination ideal in ``kept_var`` (and the
    parameters); ``cofactor`` is ``univariate / kept_var**removed_power``.
    ``back_subs`` gives each eliminated variable as a rational function of
    ``kept_var`` and the parameters, when the basis is linear in it.
    """

    kept_var: str
    univariate: Polynomial
    cofactor: Polynomial
    removed_power: int
    back_subs: Mapping[str, RationalFunction]
    basis: tuple[Polynomial, ...]
    eliminated: tuple[str, ...]

    @property
    def degree(self) -> int:
        return self.cofactor.degree(self.kept_var)


def _fixed_point_ideal(m: Model, presubs: Mapping[str, object] | None) -> Model:
    return m.substitute_params(presubs) if presubs else m


def rur_reduce(m: Model, keep: int | str, presubs: Mapping[str, object] | None = None,
               budget: int = DEFAULT_BUDGET) -> RurResult:
    """Eliminate every state variable except ``keep`` from ``rhs = 0``.

    Raises
    ------
    EquilibriumError
        If the elimination ideal has no element of positive degree in the
        kept variable (positive-dimensional fixed-point set) or the system is
        inconsistent.
    """
    mm = _fixed_point_ideal(m, presubs)
    kept = mm.state_vars[keep] if isinstance(keep, int) else keep
    mm.index(kept)
    elim = tuple(v for v in mm.state_vars if v != kept)
    G = gb_lex(mm.rhs, (kept,) + mm.params, elim, budget)
    if len(G) == 1 and G[0].is_constant():
        raise EquilibriumError("fixed-point system is inconsistent")
    part = elimination_part(G, elim)
    univ = [g for g in part if g.degree(kept) > 0]
    if not univ:
        raise EquilibriumError(
            f"elimination ideal has no polynomial in {kept}: fixed points are not isolated")
    u = min(univ, key=lambda g: (g.degree(kept), len(g.terms)))
    u = u.compact().primitive()
    cof, k = u, 0
    if mm.infectious and kept in mm.infectious_vars:
        x = Polynomial.var(kept, u.gens)
        while cof.degree(kept) > 0 and cof.constant_term() == 0 and not cof.coeffs_in(kept).get(0):
            cof = exquo(cof, x)
            k += 1
    back = _back_substitutions(G, elim, kept)
    return RurResult(kept, u, cof.primitive(), k, back, tuple(G), elim)


def _back_substitutions(G, elim, kept) -> dict[str, RationalFunction]:
    back: dict[str, RationalFunction] = {}
    for v in reversed(elim):  # smallest eliminated variable first
        larger = set(elim[: elim.index(v)])
        cands = [g for g in G if g.degree(v) == 1 and not (g.free_symbols & larger)]
        cands = [g for g in cands if not (g.coeffs_in(v)[1].free_symbols & (set(elim) - set(back)))]
        if not cands:
            continue
        g = min(cands, key=lambda q: (q.degree(), len(q.terms)))
        cs = g.coeffs_in(v)
        a = cs[1]
        b = cs.get(0, Polynomial.const(0, g.gens))
        num = subs_rational(-b, back)
        den = subs_rational(a, back)
        if den.is_zero():
            continue
        back[v] = num / den
    return {v: back[v] for v in elim if v in back}


# numeric fixed points -------------------------------------------------------------------


@dataclass(frozen=True)
class NumericFixedPoint:
    coordinates: tuple[float, ...]
    jacobian_eigenvalues: tuple[complex, ...]
    classification: str
    interior: bool
    residual: float
    converged: bool = True

    @property
    def max_real_eig(self) -> float:
        return max(e.real for e in self.jacobian_eigenvalues)

    @property
    def trace(self) -> float:
        return float(sum(e.real for e in self.jacobian_eigenvalues))

    @property
    def det(self) -> float:
        return float(np.real(np.prod(self.jacobian_eigenvalues)))


def classify(eigs: Sequence[complex], tol: float = CENTER_TOL) -> str:
    """``stable``, ``unstable``, ``center-candidate`` or ``degenerate``."""
    mr = max(e.real for e in eigs)
    if mr > tol:
        return "unstable"
    if mr < -tol:
        return "stable"
    if any(abs(e) <= tol for e in eigs):
        return "degenerate"
    return "center-candidate"


def _is_zero_dimensional(G: Sequence[Polynomial], vars_: Sequence[str]) -> bool:
    gens = G[0].gens
    for v in vars_:
        k = gens.index(v)
        ok = False
        for g in G:
            lm = max(g.terms)
            if lm[k] > 0 and all(e == 0 for j, e in enumerate(lm) if j != k):
                ok = True
                break
        if not ok:
            return False
    return True


def _poly_in(g: Polynomial, v: str, known: Mapping[str, float]) -> np.ndarray:
    """Float coefficients (highest first) of ``g`` in ``v`` after substituting ``known``."""
    cs = g.coeffs_in(v)
    d = max(cs)
    out = np.zeros(d + 1)
    for k, c in cs.items():
        val = 0.0
        for exp, coef in c.terms.items():
            t = float(coef)
            for name, e in zip(c.gens, exp):
                if e:
                    t *= known[name] ** e
            val += t
        out[d - k] = val
    return out


def _triangular_solve(G: Sequence[Polynomial], order: Sequence[str]) -> list[dict[str, float]]:
    """Solve a zero-dimensional lex basis (largest variable first in ``order``).

    The last variable's univariate polynomial is solved exactly with
    :func:`real_roots`; earlier variables are recovered numerically from the
    basis elements that only involve already-solved variables.
    """
    last = order[-1]
    univ = [g for g in G if g.free_symbols <= {last} and g.degree(last) > 0]
    if not univ:
        return []
    base = min(univ, key=lambda g: g.degree(last))
    sols = [{last: r.value} for r in real_roots(base.compact(), None)]
    for v in reversed(order[:-1]):
        new = []
        for pt in sols:
            known = set(pt)
            rel = [g for g in G if v in g.free_symbols and g.free_symbols <= known | {v}]
            if not rel:
                continue
            scale = 1.0 + max(abs(x) for x in pt.values())
            polys = [_poly_in(g, v, pt) for g in rel]
            polys = [np.trim_zeros(p, "f") for p in polys]
            polys = [p for p in polys if len(p) > 1 and np.max(np.abs(p[:-1])) > 1e-11 * np.max(np.abs(p))]
            if not polys:
                continue
            main = min(polys, key=len)
            roots = np.roots(main)
            for r in roots:
                if abs(r.imag) > 1e-7 * (1 + abs(r.real)):
                    continue
                x = float(r.real)
                res = max(abs(np.polyval(p, x)) / (np.max(np.abs(p)) * max(1.0, abs(x)) ** (len(p) - 1))
                          for p in polys)
                if res < 1e-6 * scale:
                    q = dict(pt)
                    q[v] = x
                    new.append(q)
        sols = new
    return sols


def _newton(f, J, x0: np.ndarray, max_iter: int = 50, tol: float = 1e-13) -> tuple[np.ndarray, float, bool]:
    x = np.array(x0, dtype=float)
    fx = np.asarray(f(x), dtype=float)
    r = float(np.max(np.abs(fx))) if fx.size else 0.0
    for _ in range(max_iter):
        if r <= tol:
            break
        try:
            step = np.linalg.solve(J(x), -fx)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J(x), -fx, rcond=None)[0]
        lam = 1.0
        while lam > 1e-6:
            xn = x + lam * step
            fn = np.asarray(f(xn), dtype=float)
            rn = float(np.max(np.abs(fn)))
            if rn < r or rn <= tol:
                break
            lam *= 0.5
        else:
            break
        x, fx, r = xn, fn, rn
    return x, r, r <= RESIDUAL_TOL


def numeric_system(m: Model, param_values: Mapping[str, object]):
    """Float callables ``f(x)`` and ``J(x)`` for the model at fixed parameters."""
    vals = {k: as_fraction(v) if not isinstance(v, Polynomial) else v for k, v in param_values.items()}
    missing = set(m.params) - set(vals)
    if missing:
        raise KeyError(f"missing parameter values {sorted(missing)}")
    fixed = m.substitute_params({k: vals[k] for k in m.params})
    fns = [p.to_callable(fixed.state_vars) for p in fixed.rhs]
    jac = model_jacobian(fixed)
    jfns = [[v.as_polynomial().to_callable(fixed.state_vars) for v in row] for row in jac.entries]
    f = lambda x: np.array([fn(x) for fn in fns])
    J = lambda x: np.array([[fn(x) for fn in row] for row in jfns])
    return fixed, f, J


def fixed_points_numeric(m: Model, param_values: Mapping[str, object], budget: int = DEFAULT_BUDGET,
                         include_boundary: bool = True) -> list[NumericFixedPoint]:
    """All fixed points in the closed non-negative orthant at numeric parameters.

    Raises
    ------
    EquilibriumError
        If the fixed-point set is positive-dimensional.
    """
    fixed, f, J = numeric_system(m, param_values)
    vars_ = fixed.state_vars
    G = None
    for last in reversed(vars_):
        order = tuple(v for v in vars_ if v != last) + (last,)
        G = gb_lex(fixed.rhs, (last,), order[:-1], budget)
        if len(G) == 1 and G[0].is_constant():
            return []
        if _is_zero_dimensional(G, order):
            break
    else:
        raise EquilibriumError("fixed points are not isolated (positive-dimensional ideal)")
    raw = _triangular_solve(G, order)
    out: list[NumericFixedPoint] = []
    for pt in raw:
        x0 = np.array([pt[v] for v in vars_])
        x, res, ok = _newton(f, J, x0)
        if np.min(x) < -NONNEG_TOL:
            continue
        x = np.where(np.abs(x) < 1e-14, 0.0, x)
        if any(np.max(np.abs(x - np.array(p.coordinates))) < 1e-8 * (1 + np.max(np.abs(x))) for p in out):
            continue
        eigs = tuple(complex(e) for e in np.linalg.eigvals(J(x)))
        interior = bool(np.all(x > ADMISSIBLE_EPS))
        if not include_boundary and not interior:
            continue
        out.append(NumericFixedPoint(tuple(float(v) for v in x), eigs, classify(eigs), interior, res, ok))
    out.sort(key=lambda p: p.coordinates)
    return out
