"""SIR-PH-FA models: phase-type disease stages with a single susceptible class.

The disease vector ``i`` is a row vector obeying ``i' = i (s B - V)`` with
``V = Diag(delta + Lambda) - A``. State variables are ordered
``(i1, ..., in, s, r)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Sequence

import numpy as np

from .modeldsl import Model, SirphSection
from .symalg import Polynomial, RationalFunction, SymMatrix, as_rational


@dataclass(frozen=True)
class SirPhSpec:
    """Parameters ``(alpha, A, B, delta, Lambda, gamma_s, gamma_r)`` of a SIR-PH-FA model."""

    n: int
    alpha: tuple[RationalFunction, ...]
    A: SymMatrix
    B: SymMatrix
    delta: tuple[RationalFunction, ...]
    Lambda: RationalFunction
    gamma_s: RationalFunction
    gamma_r: RationalFunction
    params: tuple[str, ...] = ()
    var_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        n = self.n
        if len(self.alpha) != n or len(self.delta) != n:
            raise ValueError("alpha and delta must have length n")
        if self.A.shape != (n, n) or self.B.shape != (n, n):
            raise ValueError("A and B must be n x n")
        if not self.var_names:
            object.__setattr__(self, "var_names", tuple(f"i{k + 1}" for k in range(n)) + ("s", "r"))
        if len(self.var_names) != n + 2:
            raise ValueError("need n + 2 variable names (disease stages, s, r)")

    @property
    def beta(self) -> tuple[RationalFunction, ...]:
        """Row sums ``B 1``."""
        return tuple(sum(self.B.row(i), as_rational(0)) for i in range(self.n))

    @property
    def a(self) -> tuple[RationalFunction, ...]:
        """Recovery rates ``(-A) 1``."""
        return tuple(-sum(self.A.row(i), as_rational(0)) for i in range(self.n))

    @property
    def V(self) -> SymMatrix:
        d = SymMatrix.diag([self.delta[k] + self.Lambda for k in range(self.n)])
        return d - self.A

    def numeric(self, values: Mapping[str, object]) -> dict[str, np.ndarray | float]:
        """Float arrays ``alpha, beta, V, A, B`` at the given parameter values."""
        ev = lambda v: float(v.evaluate(values))
        return {
            "alpha": np.array([ev(v) for v in self.alpha]),
            "beta": np.array([ev(v) for v in self.beta]),
            "V": self.V.to_numpy(values),
            "A": self.A.to_numpy(values),
            "B": self.B.to_numpy(values),
        }

    def validate(self, draws: int = 20, seed: int = 42) -> list[str]:
        """Check the sub-generator and probability-vector conditions.

        Structural sign conditions are checked on the expanded entries; row
        sums of ``A`` are checked at log-uniform positive parameter draws.
        """
        issues = []
        total = sum(self.alpha, as_rational(0))
        if not (total - 1).is_zero():
            issues.append(f"alpha sums to {total}, not 1")
        for i in range(self.n):
            for j in range(self.n):
                v = self.A[i, j]
                if i != j and v.is_polynomial() and any(c < 0 for c in v.as_polynomial().terms.values()):
                    issues.append(f"A[{i + 1},{j + 1}] = {v} has a negative term")
                b = self.B[i, j]
                if b.is_polynomial() and any(c < 0 for c in b.as_polynomial().terms.values()):
                    issues.append(f"B[{i + 1},{j + 1}] = {b} has a negative term")
        rng = np.random.default_rng(seed)
        syms = sorted(set().union(*(v.free_symbols for r in self.A.entries for v in r)))
        for _ in range(draws):
            vals = {p: Fraction(float(10 ** rng.uniform(-2, 2))) for p in syms}
            sums = [float(sum(self.A.row(i), as_rational(0)).evaluate(vals)) for i in range(self.n)]
            if any(s > 1e-12 for s in sums) or not any(s < -1e-12 for s in sums):
                issues.append("row sums of A are not all non-positive with one strictly negative")
                break
        return issues


def _rf_list(v, n, what) -> tuple[RationalFunction, ...]:
    if not isinstance(v, list):
        v = [v]
    if len(v) != n or any(isinstance(x, list) for x in v):
        raise ValueError(f"{what} must be a vector of length {n}")
    return tuple(as_rational(x) for x in v)


def _matrix(v, n, what) -> SymMatrix:
    if not isinstance(v, list) or len(v) != n or not all(isinstance(r, list) and len(r) == n for r in v):
        raise ValueError(f"{what} must be an {n} x {n} matrix")
    return SymMatrix(v)


def spec_from_section(section: SirphSection, params: Sequence[str] = (), var_names: Sequence[str] = ()) -> SirPhSpec:
    """Build a :class:`SirPhSpec` from a parsed ``sirph`` DSL block."""
    f = dict(section.fields)
    n = section.n
    for key in ("alpha", "A", "B", "Lambda"):
        if key not in f:
            raise ValueError(f"sirph block is missing {key}")
    scalar = lambda key: as_rational(f.get(key, Polynomial.const(0)))
    for key in ("Lambda", "gamma_s", "gamma_r"):
        if isinstance(f.get(key), list):
            raise ValueError(f"{key} must be a scalar")
    delta = f.get("delta", [Polynomial.const(0)] * n)
    return SirPhSpec(
        n=n,
        alpha=_rf_list(f["alpha"], n, "alpha"),
        A=_matrix(f["A"], n, "A"),
        B=_matrix(f["B"], n, "B"),
        delta=_rf_list(delta, n, "delta"),
        Lambda=scalar("Lambda"),
        gamma_s=scalar("gamma_s"),
        gamma_r=scalar("gamma_r"),
        params=tuple(params),
        var_names=tuple(var_names),
    )


def build_sirph(spec: SirPhSpec, name: str = "sirph") -> Model:
    """Expand the SIR-PH-FA equations into a polynomial :class:`Model`."""
    n = spec.n
    names = spec.var_names
    params = tuple(spec.params) or tuple(sorted(
        set().union(*(v.free_symbols for v in _all_entries(spec))) - set(names)))
    gens = names + params
    iv = [Polynomial.var(names[k], gens) for k in range(n)]
    s = Polynomial.var(names[n], gens)
    r = Polynomial.var(names[n + 1], gens)
    P = lambda v: _poly(v).with_gens(gens)
    sBV = spec.B.scale(s) - spec.V
    rhs = []
    for j in range(n):
        acc = Polynomial.const(0, gens)
        for k in range(n):
            acc = acc + iv[k] * P(sBV[k, j])
        rhs.append(acc)
    force = Polynomial.const(0, gens)
    for k, b in enumerate(spec.beta):
        force = force + iv[k] * P(b)
    L, gs, gr = P(spec.Lambda), P(spec.gamma_s), P(spec.gamma_r)
    rhs.append(L - (L + gs) * s - s * force + gr * r)
    rec = Polynomial.const(0, gens)
    for k, a in enumerate(spec.a):
        rec = rec + iv[k] * P(a)
    rhs.append(rec + gs * s - (gr + L) * r)
    return Model(name, names, params, tuple(rhs), tuple(range(n)))


def _all_entries(spec: SirPhSpec):
    yield from spec.alpha
    yield from spec.delta
    yield from (spec.Lambda, spec.gamma_s, spec.gamma_r)
    for M in (spec.A, spec.B):
        for row in M.entries:
            yield from row


def _poly(v) -> Polynomial:
    if isinstance(v, Polynomial):
        return v
    return as_rational(v).as_polynomial()


def sirph_jacobian(spec: SirPhSpec) -> SymMatrix:
    """Jacobian on the ``(i1..in, s)`` coordinates, rows indexed by equations.

    For ``gamma_r = 0`` the closed block form is returned::

        [[ (s B - V)^T , (i B)^T          ],
         [ -s beta^T   , -Lambda - gamma_s - i beta ]]

    otherwise the generic Jacobian of :func:`build_sirph` restricted to the
    same coordinates.
    """
    n = spec.n
    names = spec.var_names
    if not spec.gamma_r.is_zero():
        from .threshold import jacobian

        J = jacobian(build_sirph(spec))
        idx = list(range(n + 1))
        return J.submatrix(idx, idx)
    params = tuple(sorted(set().union(*(v.free_symbols for v in _all_entries(spec)))))
    gens = names + params
    iv = [as_rational(Polynomial.var(names[k], gens)) for k in range(n)]
    s = as_rational(Polynomial.var(names[n], gens))
    upper = (spec.B.scale(s) - spec.V).T()
    iB = [sum((iv[k] * spec.B[k, j] for k in range(n)), as_rational(0)) for j in range(n)]
    beta = spec.beta
    ibeta = sum((iv[k] * beta[k] for k in range(n)), as_rational(0))
    rows = [upper.row(j) + [iB[j]] for j in range(n)]
    rows.append([-s * beta[k] for k in range(n)] + [-spec.Lambda - spec.gamma_s - ibeta])
    return SymMatrix(rows)


def rank_one(B: SymMatrix) -> tuple[tuple[RationalFunction, ...], tuple[RationalFunction, ...]] | None:
    """Split ``B = beta alpha`` with ``alpha 1 = 1`` when ``B`` has rank one.

    Returns ``(beta, alpha)`` or ``None`` if some 2x2 minor is nonzero, ``B``
    is zero, or the row sums vanish identically.
    """
    if not B.is_square() or B.is_zero() or not B.minors2_vanish():
        return None
    beta = tuple(sum(B.row(i), as_rational(0)) for i in range(B.rows))
    piv = next((i for i, b in enumerate(beta) if not b.is_zero()), None)
    if piv is None:
        return None
    alpha = tuple(B[piv, j] / beta[piv] for j in range(B.cols))
    return beta, alpha


@dataclass(frozen=True)
class KernelObjects:
    """Age-of-infection kernel objects.

    ``a_hat`` is the Laplace transform ``alpha (z I + V)^{-1} beta`` in the
    variable ``laplace_var``; ``R_integral = alpha V^{-1} beta``; ``a_time``
    maps a parameter assignment to the numeric kernel ``tau -> alpha
    exp(-tau V) beta``.
    """

    a_hat: RationalFunction
    R_integral: RationalFunction
    laplace_var: str
    spec: SirPhSpec

    def a_time(self, values: Mapping[str, object]) -> Callable[[float], float]:
        num = self.spec.numeric(values)
        al, be, V = num["alpha"], num["beta"], num["V"]
        return lambda tau: float(al @ expm(-tau * V) @ be)


def kernel(spec: SirPhSpec, laplace_var: str = "s") -> KernelObjects:
    """Laplace-domain kernel and the integral reproduction number.

    Raises
    ------
    ValueError
        If ``B`` is not of rank one.
    ZeroDivisionError
        If ``V`` is singular.
    """
    split = rank_one(spec.B)
    if split is None:
        raise ValueError("B is not of rank one")
    beta, alpha = split
    syms = set().union(*(v.free_symbols for v in _all_entries(spec)))
    if laplace_var in syms:
        raise ValueError(f"Laplace variable {laplace_var!r} clashes with a parameter")
    z = as_rational(Polynomial.var(laplace_var))
    n = spec.n
    V = spec.V
    shifted = V + SymMatrix.diag([z] * n)
    a_hat = _bilinear(alpha, shifted.inverse(), beta)
    R = _bilinear(alpha, V.inverse(), beta)
    return KernelObjects(a_hat, R, laplace_var, spec)


def r0_integral(spec: SirPhSpec) -> RationalFunction:
    """Integral reproduction number ``alpha V^{-1} beta``.

    Unlike :func:`threshold.r0_ngm` on the built model this carries no
    ``s_dfe`` factor; for rank-one ``B`` the two differ by exactly that factor.
    """
    return _bilinear(spec.alpha, spec.V.inverse(), spec.beta)


def _bilinear(row, M: SymMatrix, col) -> RationalFunction:
    acc = as_rational(0)
    for i, a in enumerate(row):
        if a.is_zero():
            continue
        for j, b in enumerate(col):
            if b.is_zero() or M[i, j].is_zero():
                continue
            acc = acc + a * M[i, j] * b
    return acc


# numerics ---------------------------------------------------------------------

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0, 10559470521600.0, 670442572800.0, 33522128640.0,
    1323241920.0, 40840800.0, 960960.0, 16380.0, 182.0, 1.0,
)
_THETA13 = 5.371920351148152


def expm(A: np.ndarray) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a [13/13] Pade approximant."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if A.shape != (n, n):
        raise ValueError("expm needs a square matrix")
    norm = np.linalg.norm(A, 1)
    s = 0
    if norm > _THETA13:
        s = max(0, int(math.ceil(math.log2(norm / _THETA13))))
    A = A / (2 ** s)
    b = _PADE13
    I = np.eye(n)
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * I)
    W = A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I
    X = np.linalg.solve(W - U, W + U)
    for _ in range(s):
        X = X @ X
    return X


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-11,
                     max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""

    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * tol:
            return left + right + delta / 15.0
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth + 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth + 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 0)


@dataclass(frozen=True)
class QuadratureCheck:
    integral: float
    tail: float
    R_integral: float
    T: float

    @property
    def residual(self) -> float:
        return abs(self.integral + self.tail - self.R_integral)


def kernel_quadrature_check(spec: SirPhSpec, values: Mapping[str, object], T: float | None = None,
                            tail_tol: float = 1e-10, quad_tol: float = 1e-9,
                            objects: KernelObjects | None = None) -> QuadratureCheck:
    """Compare ``int_0^inf a(tau) dtau`` with ``alpha V^{-1} beta``.

    The integral is split at ``T``: adaptive Simpson on ``[0, T]`` plus the
    analytic tail ``alpha exp(-T V) V^{-1} beta``. When ``T`` is omitted it is
    doubled until ``|alpha| |exp(-T V)|_1 |V^{-1} beta|`` drops below
    ``tail_tol``.

    Raises
    ------
    ValueError
        If some eigenvalue of ``V`` has non-positive real part (the kernel does
        not decay).
    """
    objs = objects or kernel(spec)
    num = spec.numeric(values)
    al, be, V = num["alpha"], num["beta"], num["V"]
    if np.min(np.linalg.eigvals(V).real) <= 0:
        raise ValueError("kernel does not decay: V has an eigenvalue with non-positive real part")
    Vinv_b = np.linalg.solve(V, be)
    if T is None:
        T = 1.0
        while np.linalg.norm(al, 1) * np.linalg.norm(expm(-T * V), 1) * np.linalg.norm(Vinv_b, 1) > tail_tol:
            T *= 2.0
            if T > 1e8:
                raise ValueError("could not find a tail cut-off")
    a = objs.a_time(values)
    integral = adaptive_simpson(a, 0.0, T, quad_tol)
    tail = float(al @ expm(-T * V) @ Vinv_b)
    R = float(objs.R_integral.evaluate(values))
    return QuadratureCheck(integral, tail, R, T)
