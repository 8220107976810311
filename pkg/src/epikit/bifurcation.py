"""Bifurcation candidates: Hurwitz determinants, eliminated loci, branch scans.

Everything here works on parameter slices. Symbolic objects (products of
fixed-point scalars, eliminated loci) are exact; searches over parameters
are numeric and only return *candidates*.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .equilibria import (
    ADMISSIBLE_EPS,
    EquilibriumError,
    NumericFixedPoint,
    classify,
    fixed_points_numeric,
    numeric_system,
    rur_reduce,
)
from .modeldsl import Model, model_jacobian
from .symalg import (
    Polynomial,
    RationalFunction,
    SymMatrix,
    as_rational,
    bareiss_det,
    charpoly,
    elimination_part,
    gb_lex,
)
from .symalg.groebner import DEFAULT_BUDGET

EVENT_TOL = 1e-6
RESIDUAL_TOL = 1e-8


class BifurcationError(RuntimeError):
    """Analysis failure in a bifurcation computation."""


# Hurwitz determinants --------------------------------------------------------------


def hurwitz_from_coeffs(coeffs: Sequence[object]) -> list[RationalFunction]:
    """Hurwitz determinants ``H_1..H_n`` of ``a0 u^n + a1 u^(n-1) + ... + an``.

    ``coeffs`` lists ``a0, a1, ..., an`` (highest power first). The Hurwitz
    matrix has entry ``(i, j) = a_{2j - i}`` (1-based, zero out of range).
    """
    a = [as_rational(c) for c in coeffs]
    n = len(a) - 1
    if n < 1:
        return []
    if a[0].is_zero():
        raise ValueError("leading coefficient is zero")
    zero = as_rational(0)
    H = [[a[2 * j - i] if 0 <= 2 * j - i <= n else zero for j in range(1, n + 1)]
         for i in range(1, n + 1)]
    full = SymMatrix(H)
    return [full.submatrix(range(k), range(k)).det() for k in range(1, n + 1)]


def hurwitz(p: Polynomial, indet: str = "u") -> list[Polynomial | RationalFunction]:
    """Hurwitz determinants of ``p`` normalised to be monic in ``indet``.

    Returns polynomials when the leading coefficient is a nonzero number.
    For a non-constant leading coefficient the raw coefficients are used;
    ``H_k`` then carries an extra factor ``lead^k`` (same sign when the
    leading coefficient is positive).

    Raises
    ------
    ValueError
        For the zero polynomial.
    """
    if p.is_zero():
        raise ValueError("Hurwitz determinants of the zero polynomial")
    cs = p.coeffs_in(indet)
    n = max(cs)
    zero = Polynomial.const(0, p.gens)
    coeffs = [cs.get(n - k, zero) for k in range(n + 1)]
    lead = coeffs[0]
    if lead.is_constant():
        inv = 1 / lead.constant_value()
        coeffs = [c * inv for c in coeffs]
    out = hurwitz_from_coeffs(coeffs)
    return [h.as_polynomial() if h.is_polynomial() else h for h in out]


# fixed-point scalars ------------------------------------------------------------------


def resultant(f: Polynomial, g: Polynomial, var: str) -> Polynomial:
    """Sylvester resultant of ``f`` and ``g`` with respect to ``var``."""
    f, g = f._align(g)
    m, n = f.degree(var), g.degree(var)
    if m < 0 or n < 0:
        return Polynomial.const(0, f.gens)
    if m == 0:
        return f ** n
    if n == 0:
        return g ** m
    fc, gc = f.coeffs_in(var), g.coeffs_in(var)
    zero = Polynomial.const(0, f.gens)
    size = m + n
    rows = []
    for k in range(n):
        rows.append([fc.get(m - (j - k), zero) if 0 <= j - k <= m else zero for j in range(size)])
    for k in range(m):
        rows.append([gc.get(n - (j - k), zero) if 0 <= j - k <= n else zero for j in range(size)])
    return bareiss_det(rows).compact()


def scalar_matrix_functions(J: SymMatrix) -> dict[str, RationalFunction]:
    """Trace, determinant and last Hurwitz determinant of ``det(uI - J)``."""
    out = {"trace": J.trace(), "det": J.det()}
    n = J.rows
    P, q = J.cleared()
    cp = charpoly(SymMatrix(P), _fresh("u", J.free_symbols))
    var = _fresh("u", J.free_symbols)
    cs = cp.coeffs_in(var)
    # coefficients of det(uI - J) = q^-n det(q u I - P)
    coeffs = [RationalFunction(cs.get(n - k, Polynomial.const(0, cp.gens)), q ** k) for k in range(n + 1)]
    out["hurwitz"] = hurwitz_from_coeffs(coeffs)[-1]
    return out


def _fresh(base: str, taken) -> str:
    name = base
    while name in taken:
        name = "_" + name
    return name


@dataclass(frozen=True)
class ProductScalars:
    """Products of trace, determinant and ``H_n`` over a set of fixed points.

    Each value equals ``prod_i S(E_i)`` as a rational function of the
    parameters: ``Res(c, num S) * lc(c)^(deg den - deg num) / Res(c, den S)``
    with ``c`` the univariate polynomial whose roots index the fixed points.
    """

    kept_var: str
    subset: str
    univariate: Polynomial
    values: Mapping[str, RationalFunction]
    normalization: str

    @property
    def trE(self) -> RationalFunction:
        return self.values["trace"]

    @property
    def detE(self) -> RationalFunction:
        return self.values["det"]

    @property
    def HnE(self) -> RationalFunction:
        return self.values["hurwitz"]


def product_scalars(m: Model, subset: str = "interior", keep: str | None = None,
                    budget: int = DEFAULT_BUDGET) -> ProductScalars:
    """Products over fixed points of Jacobian scalars, via resultants.

    ``subset='interior'`` uses the reduction polynomial with the maximal power
    of an infectious kept variable divided out, which removes the DFE.
    """
    if subset not in ("interior", "all"):
        raise ValueError("subset must be 'interior' or 'all'")
    if keep is None:
        keep = m.infectious_vars[0] if m.infectious else m.state_vars[-1]
    r = rur_reduce(m, keep, budget=budget)
    missing = [v for v in r.eliminated if v not in r.back_subs]
    if missing:
        raise BifurcationError(f"no rational back-substitution for {missing}")
    c = r.cofactor if subset == "interior" else r.univariate
    J = model_jacobian(m).subs(dict(r.back_subs))
    lc = c.leading_coeff_in(keep)
    values = {}
    for name, S in scalar_matrix_functions(J).items():
        num, den = S.num, S.den
        dn, dd = max(num.degree(keep), 0), max(den.degree(keep), 0)
        top = resultant(c, num, keep)
        bottom = resultant(c, den, keep)
        if dd >= dn:
            top = top * lc ** (dd - dn)
        else:
            bottom = bottom * lc ** (dn - dd)
        values[name] = RationalFunction(top, bottom)
    return ProductScalars(keep, subset, c, values,
                          "Res(c, num)/Res(c, den) with the lc(c) power of the resultant divided out")


# eliminated loci -------------------------------------------------------------------------


@dataclass(frozen=True)
class EliminatedLocus:
    scalar_name: str
    polys: tuple[Polynomial, ...]
    note: str = ""

    def roots(self, param: str, interval: tuple[float, float]) -> list[float]:
        """Real roots in ``param`` of the univariate locus polynomials."""
        from .symalg import real_roots

        out = []
        for p in self.polys:
            if p.free_symbols == {param}:
                out.extend(r.value for r in real_roots(p.compact(), interval))
        return sorted(set(out))


def scalar_polynomial(m: Model, scalar: str) -> Polynomial:
    """Trace, determinant or ``hurwitz_k`` of the Jacobian as a polynomial."""
    J = model_jacobian(m)
    P = J.polynomial_entries()
    if scalar == "trace":
        return J.trace().as_polynomial()
    if scalar in ("det", "determinant"):
        return bareiss_det(P).with_gens(m.gens)
    if scalar.startswith("hurwitz_"):
        k = int(scalar.split("_", 1)[1])
        u = _fresh("u", set(m.gens))
        hs = hurwitz(charpoly(J, u), u)
        if not 1 <= k <= len(hs):
            raise ValueError(f"hurwitz index must be in 1..{len(hs)}")
        return hs[k - 1].with_gens(m.gens)
    raise ValueError(f"unknown scalar {scalar!r}")


def eliminated_locus(m: Model, scalar: str, budget: int = DEFAULT_BUDGET) -> EliminatedLocus:
    """Parameter-only elements of the ideal ``<rhs, scalar>``.

    Raises
    ------
    GroebnerBudgetExceeded
        When the Groebner computation exceeds ``budget``.
    """
    s = scalar_polynomial(m, scalar)
    name = "determinant" if scalar == "det" else scalar
    G = gb_lex(list(m.rhs) + [s], m.params, m.state_vars, budget)
    part = tuple(g for g in elimination_part(G, m.state_vars))
    if not part:
        return EliminatedLocus(name, (), "elimination part is empty")
    return EliminatedLocus(name, part)


# Bogdanov-Takens candidates ------------------------------------------------------------------


@dataclass(frozen=True)
class CandidatePoint:
    param_values: Mapping[str, float]
    kind: str
    residuals: tuple[float, ...]
    witness_fixed_point: NumericFixedPoint


def _slice(m: Model, free: Sequence[str], fixed: Mapping[str, object]) -> Model:
    extra = set(m.params) - set(free) - set(fixed)
    if extra:
        raise ValueError(f"parameters neither free nor fixed: {sorted(extra)}")
    return m.substitute_params(fixed)


def _bt_system(ms: Model):
    """Polynomials ``rhs, trace, det`` and their gradient over ``state + params``."""
    eqs = list(ms.rhs) + [scalar_polynomial(ms, "trace"), scalar_polynomial(ms, "det")]
    gens = ms.gens
    fns = [p.to_callable(gens) for p in eqs]
    grads = [[p.diff(v).to_callable(gens) for v in gens] for p in eqs]
    F = lambda z: np.array([f(z) for f in fns], dtype=float)
    DF = lambda z: np.array([[g(z) for g in row] for row in grads], dtype=float)
    return F, DF


def _newton_square(F, DF, z0, max_iter: int = 60, tol: float = 1e-14):
    z = np.array(z0, dtype=float)
    r = float(np.max(np.abs(F(z))))
    for _ in range(max_iter):
        if r <= tol:
            break
        step = np.linalg.lstsq(DF(z), -F(z), rcond=None)[0]
        lam = 1.0
        while lam > 1e-8:
            zn = z + lam * step
            rn = float(np.max(np.abs(F(zn))))
            if np.isfinite(rn) and rn < r:
                break
            lam *= 0.5
        else:
            break
        z, r = zn, rn
    return z, r


def bt_candidates(m: Model, free: Sequence[str], box: Sequence[Sequence[float]],
                  fixed: Mapping[str, object], grid: int = 8) -> list[CandidatePoint]:
    """Bogdanov-Takens candidates: ``rhs = trace = det = 0`` in a parameter box.

    Seeds are the interior fixed points on a ``grid x grid`` lattice of the
    box; each is refined by Newton on the square system in the state
    variables and the two free parameters. Accepted points lie in the box,
    have positive parameters, an interior fixed point and residuals at most
    ``1e-8``.
    """
    free = tuple(free)
    if len(free) != 2:
        raise ValueError("exactly two free parameters are required")
    ms = _slice(m, free, fixed)
    order = tuple(p for p in ms.params)
    F, DF = _bt_system(ms)
    (a0, a1), (b0, b1) = box
    n = ms.n
    found: list[CandidatePoint] = []
    for pa in np.linspace(a0, a1, grid):
        for pb in np.linspace(b0, b1, grid):
            vals = dict(zip(free, (pa, pb)))
            try:
                pts = fixed_points_numeric(ms, {k: Fraction(repr(float(vals[k]))) for k in order})
            except EquilibriumError:
                continue
            for pt in pts:
                if not pt.interior:
                    continue
                z0 = list(pt.coordinates) + [vals[k] for k in order]
                z, res = _newton_square(F, DF, z0)
                x, pv = z[:n], dict(zip(order, z[n:]))
                if not all(lo - 1e-12 <= pv[k] <= hi + 1e-12 for k, (lo, hi) in zip(free, box)):
                    continue
                if min(pv.values()) <= 0 or np.min(x) <= ADMISSIBLE_EPS:
                    continue
                resid = np.abs(F(z))
                if float(np.max(resid)) > RESIDUAL_TOL:
                    continue
                if any(max(abs(pv[k] - c.param_values[k]) for k in order) < 1e-7 for c in found):
                    continue
                _, f, J = numeric_system(ms, {k: pv[k] for k in order})
                eigs = tuple(complex(e) for e in np.linalg.eigvals(J(x)))
                witness = NumericFixedPoint(tuple(float(v) for v in x), eigs, classify(eigs), True,
                                            float(np.max(np.abs(f(x)))))
                found.append(CandidatePoint({k: float(pv[k]) for k in order}, "bogdanov-takens",
                                            (float(np.max(resid[:n])), float(resid[n]), float(resid[n + 1])),
                                            witness))
    found.sort(key=lambda c: tuple(c.param_values[k] for k in order))
    return found


def candidates_csv(cands: Sequence[CandidatePoint], free: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([free[0], free[1], "kind", "residual"])
    for c in cands:
        w.writerow([repr(c.param_values[free[0]]), repr(c.param_values[free[1]]), c.kind, repr(max(c.residuals))])
    return buf.getvalue()


# one-parameter branch scans -----------------------------------------------------------------------


@dataclass(frozen=True)
class BranchScan:
    free_param: str
    state_vars: tuple[str, ...]
    grid: tuple[float, ...]
    branches: tuple[tuple[NumericFixedPoint, ...], ...]
    events: tuple[tuple[float, str], ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.free_param, "branch_id", *self.state_vars, "max_real_eig", "classification"])
        for p, pts in zip(self.grid, self.branches):
            for k, pt in enumerate(pts):
                w.writerow([repr(p), k, *(repr(c) for c in pt.coordinates), repr(pt.max_real_eig), pt.classification])
        return buf.getvalue()

    def events_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([self.free_param, "event"])
        for p, e in self.events:
            w.writerow([f"{p:.9f}", e])
        return buf.getvalue()


def _points_at(ms: Model, free: str, value: float) -> list[NumericFixedPoint]:
    return fixed_points_numeric(ms, {free: Fraction(repr(float(value)))})


def _bisect(pred: Callable[[float], bool], lo: float, hi: float, tol: float) -> float:
    """Locate the switch of ``pred`` (true at ``lo``, false at ``hi``)."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _match(prev: Sequence[NumericFixedPoint], cur: Sequence[NumericFixedPoint]) -> list[tuple[int, int]]:
    """Greedy nearest-neighbour pairing of interior points at adjacent grid values."""
    pairs = []
    used = set()
    for i, p in enumerate(prev):
        if not p.interior:
            continue
        best, bd = None, math.inf
        for j, q in enumerate(cur):
            if j in used or not q.interior:
                continue
            d = float(np.max(np.abs(np.subtract(p.coordinates, q.coordinates))))
            if d < bd:
                best, bd = j, d
        if best is not None:
            used.add(best)
            pairs.append((i, best))
    return pairs


def _nearest_interior(pts, target) -> NumericFixedPoint | None:
    cands = [p for p in pts if p.interior]
    if not cands:
        return None
    return min(cands, key=lambda p: float(np.max(np.abs(np.subtract(p.coordinates, target)))))


def branch_scan(m: Model, free: str, lo: float, hi: float, fixed: Mapping[str, object],
                n: int = 101, tol: float = EVENT_TOL) -> BranchScan:
    """Fixed points along a parameter segment with refined events.

    Events are changes in the number of fixed points in the closed orthant
    (``branch-birth`` / ``branch-exit-domain``) and sign changes of the trace
    or determinant along interior branches. Each is bracketed on the grid
    and refined by bisection to ``tol``.
    """
    ms = _slice(m, (free,), fixed)
    if ms.params != (free,):
        raise ValueError(f"all parameters except {free} must be fixed")
    grid = np.linspace(lo, hi, n)
    branches = [tuple(_points_at(ms, free, p)) for p in grid]
    events: list[tuple[float, str]] = []
    for k in range(n - 1):
        a, b = grid[k], grid[k + 1]
        pa, pb = branches[k], branches[k + 1]
        ca, cb = len(pa), len(pb)
        if ca != cb:
            where = _bisect(lambda t: len(_points_at(ms, free, t)) == ca, a, b, tol)
            events.append((float(where), "branch-birth" if cb > ca else "branch-exit-domain"))
            continue
        for i, j in _match(pa, pb):
            for name, attr in (("trace-sign-change", "trace"), ("det-sign-change", "det")):
                sa, sb = getattr(pa[i], attr), getattr(pb[j], attr)
                if np.sign(sa) == np.sign(sb) or sa == 0:
                    continue
                xa, xb = np.array(pa[i].coordinates), np.array(pb[j].coordinates)

                def same_side(t, xa=xa, xb=xb, sa=sa, attr=attr):
                    w = (t - a) / (b - a)
                    q = _nearest_interior(_points_at(ms, free, t), (1 - w) * xa + w * xb)
                    return q is not None and np.sign(getattr(q, attr)) == np.sign(sa)

                events.append((float(_bisect(same_side, a, b, tol)), name))
    events.sort()
    return BranchScan(free, ms.state_vars, tuple(float(g) for g in grid), tuple(branches), tuple(events))


# simulation -------------------------------------------------------------------------------------------


@dataclass(frozen=True)
class Trajectory:
    state_vars: tuple[str, ...]
    t: np.ndarray
    y: np.ndarray  # shape (len(t), n)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["t", *self.state_vars])
        for t, row in zip(self.t, self.y):
            w.writerow([repr(float(t)), *(repr(float(v)) for v in row)])
        return buf.getvalue()


def simulate(m: Model, params: Mapping[str, object], init: Sequence[float], t_end: float,
             dt_out: float, rtol: float = 1e-8, atol: float = 1e-10) -> Trajectory:
    """Integrate with an adaptive Runge-Kutta 4(5) pair and sample every ``dt_out``.

    Raises
    ------
    BifurcationError
        If the integrator fails (for example on step-size underflow).
    """
    if len(init) != m.n:
        raise ValueError(f"expected {m.n} initial values, got {len(init)}")
    if dt_out <= 0 or t_end < 0:
        raise ValueError("need dt_out > 0 and t_end >= 0")
    _, f, _ = numeric_system(m, params)
    steps = int(math.floor(t_end / dt_out + 1e-9))
    t_eval = np.arange(steps + 1) * dt_out
    sol = solve_ivp(lambda t, x: f(x), (0.0, float(t_end)), np.asarray(init, dtype=float), method="RK45",
                    t_eval=t_eval, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise BifurcationError(f"integration failed: {sol.message}")
    return Trajectory(m.state_vars, sol.t, sol.y.T)
