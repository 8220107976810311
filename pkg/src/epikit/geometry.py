"""Lagrange-Hamilton objects attached to a vector field ``x' = X(x)``.

With ``J`` the Jacobian of ``X``:

* least-squares Lagrangian ``L = sum (y_k - X_k)^2`` and Hamiltonian
  ``H = 1/4 sum p_k^2 + sum X_k p_k``;
* Lagrangian connection ``N = -(J - J^T)/2`` and d-torsions ``dN/dx_k``;
* Yang-Mills energy ``EYM = Tr(F F^T)/2`` with ``F = -N``;
* Hamiltonian connection ``J + J^T`` and d-torsions ``d(J - J^T)/dx_k``.

Torsions are plain partial derivatives; for connections depending on ``x``
only this agrees with the covariant formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .modeldsl import Model, model_jacobian
from .symalg import Polynomial, RationalFunction, SymMatrix

HALF = Fraction(1, 2)


def _aux_names(m: Model, prefix: str) -> tuple[str, ...]:
    taken = set(m.gens)
    out = []
    for k in range(1, m.n + 1):
        name = f"{prefix}{k}"
        while name in taken:
            name = "_" + name
        out.append(name)
    return tuple(out)


@dataclass(frozen=True)
class GeometryBundle:
    state_vars: tuple[str, ...]
    y_vars: tuple[str, ...]
    p_vars: tuple[str, ...]
    L: Polynomial
    H: Polynomial
    J: SymMatrix
    N_lagrange: SymMatrix
    R_lagrange: tuple[SymMatrix, ...]
    EYM: RationalFunction
    N_hamilton: SymMatrix
    R_hamilton: tuple[SymMatrix, ...]

    def invariant_failures(self) -> list[str]:
        """Names of structural identities that do not hold (empty when all do)."""
        bad = []
        if not (self.N_lagrange + self.N_lagrange.T()).is_zero():
            bad.append("N_lagrange not skew")
        if not (self.N_hamilton - self.N_hamilton.T()).is_zero():
            bad.append("N_hamilton not symmetric")
        for k, (rh, rl) in enumerate(zip(self.R_hamilton, self.R_lagrange)):
            if not (rh + rl.scale(2)).is_zero():
                bad.append(f"R_hamilton[{k}] != -2 R_lagrange[{k}]")
        if not (self.EYM - upper_square_sum(self.N_lagrange)).is_zero():
            bad.append("EYM differs from the upper-triangular sum of squares")
        return bad


def upper_square_sum(N: SymMatrix) -> RationalFunction:
    """Sum of squares of the strictly upper-triangular entries."""
    acc = RationalFunction(0)
    for i in range(N.rows):
        for j in range(i + 1, N.cols):
            acc = acc + N[i, j] * N[i, j]
    return acc


def yang_mills_energy(N: SymMatrix) -> RationalFunction:
    F = -N
    return (F @ F.T()).trace() * HALF


def geometry_objects(m: Model) -> GeometryBundle:
    ys = _aux_names(m, "y")
    ps = _aux_names(m, "p")
    gens = m.gens + ys + ps
    X = [p.with_gens(gens) for p in m.rhs]
    L = Polynomial.const(0, gens)
    H = Polynomial.const(0, gens)
    for k in range(m.n):
        d = Polynomial.var(ys[k], gens) - X[k]
        pk = Polynomial.var(ps[k], gens)
        L = L + d * d
        H = H + pk * pk * Fraction(1, 4) + X[k] * pk
    J = model_jacobian(m)
    skew = J - J.T()
    N_l = skew.scale(-HALF)
    R_l = tuple(N_l.diff(v) for v in m.state_vars)
    R_h = tuple(skew.diff(v) for v in m.state_vars)
    return GeometryBundle(m.state_vars, ys, ps, L, H, J, N_l, R_l, yang_mills_energy(N_l),
                          J + J.T(), R_h)
