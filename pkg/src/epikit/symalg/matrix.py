"""Dense matrices of rational functions with exact linear algebra."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from typing import Callable, Mapping, Sequence

import networkx as nx
import numpy as np

from .polynomial import Polynomial, _merge_gens, exquo
from .ratfunc import RationalFunction, as_rational


class SymMatrix:
    """Immutable ``rows x cols`` grid of :class:`RationalFunction` entries."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, data: Sequence[Sequence[object]]):
        data = [list(r) for r in data]
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and one column")
        cols = len(data[0])
        if any(len(r) != cols for r in data):
            raise ValueError("ragged matrix rows")
        gens: tuple[str, ...] = ()
        for r in data:
            for v in r:
                if isinstance(v, (Polynomial, RationalFunction)):
                    gens = _merge_gens(gens, v.gens)
        self.rows = len(data)
        self.cols = cols
        self.entries = tuple(tuple(as_rational(v, gens) for v in r) for r in data)

    # construction ----------------------------------------------------------

    @classmethod
    def zeros(cls, rows: int, cols: int | None = None) -> "SymMatrix":
        return cls([[0] * (cols or rows) for _ in range(rows)])

    @classmethod
    def identity(cls, n: int) -> "SymMatrix":
        return cls([[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def diag(cls, values: Sequence[object]) -> "SymMatrix":
        n = len(values)
        return cls([[values[i] if i == j else 0 for j in range(n)] for i in range(n)])

    # access ------------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def row(self, i: int) -> list[RationalFunction]:
        return list(self.entries[i])

    def col(self, j: int) -> list[RationalFunction]:
        return [r[j] for r in self.entries]

    def tolist(self) -> list[list[RationalFunction]]:
        return [list(r) for r in self.entries]

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "SymMatrix":
        return SymMatrix([[self.entries[i][j] for j in cols] for i in rows])

    def map(self, fn: Callable[[RationalFunction], object]) -> "SymMatrix":
        return SymMatrix([[fn(v) for v in r] for r in self.entries])

    def is_square(self) -> bool:
        return self.rows == self.cols

    @property
    def free_symbols(self) -> frozenset[str]:
        out = frozenset()
        for r in self.entries:
            for v in r:
                out |= v.free_symbols
        return out

    # arithmetic --------------------------------------------------------------

    def _check_same(self, other: "SymMatrix"):
        if self.shape != other.shape:
            raise ValueError(f"shape mismatch {self.shape} vs {other.shape}")

    def __add__(self, other: "SymMatrix") -> "SymMatrix":
        self._check_same(other)
        return SymMatrix([[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __sub__(self, other: "SymMatrix") -> "SymMatrix":
        self._check_same(other)
        return SymMatrix([[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)])

    def __neg__(self) -> "SymMatrix":
        return self.map(lambda v: -v)

    def scale(self, c) -> "SymMatrix":
        return self.map(lambda v: v * c)

    def __matmul__(self, other: "SymMatrix") -> "SymMatrix":
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        # multiply the cleared polynomial matrices, then divide once per entry
        A, qa = self.cleared()
        B, qb = other.cleared()
        q = qa * qb
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = None
                for k in range(self.cols):
                    a, b = A[i][k], B[k][j]
                    if a.is_zero() or b.is_zero():
                        continue
                    acc = a * b if acc is None else acc + a * b
                row.append(as_rational(0) if acc is None else RationalFunction(acc, q))
            out.append(row)
        return SymMatrix(out)

    def T(self) -> "SymMatrix":
        return SymMatrix([list(c) for c in zip(*self.entries)])

    transpose = T

    def trace(self) -> RationalFunction:
        if not self.is_square():
            raise ValueError("trace of non-square matrix")
        acc = as_rational(0)
        for i in range(self.rows):
            acc = acc + self.entries[i][i]
        return acc

    def __eq__(self, other) -> bool:
        if not isinstance(other, SymMatrix) or self.shape != other.shape:
            return False
        return all(a == b for r1, r2 in zip(self.entries, other.entries) for a, b in zip(r1, r2))

    __hash__ = None

    def is_zero(self) -> bool:
        return all(v.is_zero() for r in self.entries for v in r)

    def subs(self, mapping: Mapping[str, object]) -> "SymMatrix":
        return self.map(lambda v: v.subs(mapping))

    def diff(self, var: str) -> "SymMatrix":
        return self.map(lambda v: v.diff(var))

    # polynomial views ---------------------------------------------------------

    def is_polynomial(self) -> bool:
        return all(v.is_polynomial() for r in self.entries for v in r)

    def common_denominator(self) -> Polynomial:
        """Least common multiple (best effort) of the entry denominators."""
        q = Polynomial.const(1)
        for r in self.entries:
            for v in r:
                if v.den.is_constant():
                    continue
                d = v.den
                q2, d2 = q._align(d)
                from .ratfunc import poly_gcd

                g = poly_gcd(q2, d2)
                q = q2 * exquo(d2, g)
        return q

    def cleared(self) -> tuple[list[list[Polynomial]], Polynomial]:
        """Return polynomial entries ``P`` and ``q`` with ``self = P / q``."""
        q = self.common_denominator()
        if q.is_constant():
            q = Polynomial.const(1, q.gens)
        P = []
        for r in self.entries:
            row = []
            for v in r:
                if v.is_zero():
                    row.append(Polynomial.const(0))
                else:
                    qq, d = q._align(v.den)
                    row.append(v.num * exquo(qq, d))
            P.append(row)
        return P, q

    def polynomial_entries(self) -> list[list[Polynomial]]:
        if not self.is_polynomial():
            raise ValueError("matrix has non-polynomial entries; clear denominators first")
        return [[v.as_polynomial() for v in r] for r in self.entries]

    # determinants, inverse, characteristic polynomial ---------------------------

    def det(self) -> RationalFunction:
        """Determinant by fraction-free Bareiss elimination on cleared entries."""
        if not self.is_square():
            raise ValueError("determinant of non-square matrix")
        P, q = self.cleared()
        d = bareiss_det(P)
        return RationalFunction(d, q ** self.rows)

    def inverse(self) -> "SymMatrix":
        """Exact inverse ``q adj(P) / det(P)`` where ``self = P / q``.

        Cofactors are fraction-free Bareiss determinants, so every entry
        shares the single denominator ``det(P)`` before cancellation.
        """
        if not self.is_square():
            raise ValueError("inverse of non-square matrix")
        n = self.rows
        P, q = self.cleared()
        gens = q.gens
        for r in P:
            for v in r:
                gens = _merge_gens(gens, v.gens)
        P = [[v.with_gens(gens) for v in r] for r in P]
        q = q.with_gens(gens)
        d = bareiss_det(P)
        if d.is_zero():
            raise ZeroDivisionError("matrix is singular")
        if n == 1:
            return SymMatrix([[RationalFunction(q, d)]])
        out = [[None] * n for _ in range(n)]
        for i in range(n):
            for j in range(n):
                minor = [[P[r][c] for c in range(n) if c != i] for r in range(n) if r != j]
                cof = bareiss_det(minor)
                if (i + j) % 2:
                    cof = -cof
                out[i][j] = RationalFunction(q * cof, d)
        return SymMatrix(out)

    def rank(self) -> int:
        """Rank over the field of rational functions in the entry symbols."""
        rows = [list(r) for r in self.entries]
        rank = 0
        for c in range(self.cols):
            piv = next((r for r in range(rank, self.rows) if not rows[r][c].is_zero()), None)
            if piv is None:
                continue
            rows[rank], rows[piv] = rows[piv], rows[rank]
            p = rows[rank][c]
            for r in range(rank + 1, self.rows):
                if not rows[r][c].is_zero():
                    f = rows[r][c] / p
                    rows[r] = [a - f * b for a, b in zip(rows[r], rows[rank])]
            rank += 1
            if rank == self.rows:
                break
        return rank

    def charpoly(self, indet: str = "u") -> Polynomial:
        return charpoly(self, indet)

    def minors2_vanish(self) -> bool:
        """True when every 2x2 minor is identically zero (rank at most one)."""
        for r1, r2 in combinations(range(self.rows), 2):
            for c1, c2 in combinations(range(self.cols), 2):
                a = self.entries
                if not (a[r1][c1] * a[r2][c2] - a[r1][c2] * a[r2][c1]).is_zero():
                    return False
        return True

    def to_numpy(self, values: Mapping[str, object]) -> np.ndarray:
        out = np.empty(self.shape, dtype=float)
        for i, r in enumerate(self.entries):
            for j, v in enumerate(r):
                out[i, j] = float(v.evaluate(values))
        return out

    def numeric_evaluator(self, names: Sequence[str]) -> Callable[[np.ndarray], np.ndarray]:
        fns = [[v.to_callable(names) for v in r] for r in self.entries]

        def f(x):
            return np.array([[fn(x) for fn in r] for r in fns], dtype=float)

        return f

    def __str__(self) -> str:
        return "[" + ",\n ".join("[" + ", ".join(str(v) for v in r) + "]" for r in self.entries) + "]"

    def __repr__(self) -> str:
        return f"SymMatrix({self.rows}x{self.cols})"

    def to_strings(self) -> list[list[str]]:
        return [[str(v) for v in r] for r in self.entries]


def bareiss_det(P: list[list[Polynomial]]) -> Polynomial:
    """Fraction-free determinant of a square polynomial matrix."""
    n = len(P)
    gens: tuple[str, ...] = ()
    for r in P:
        for v in r:
            gens = _merge_gens(gens, v.gens)
    M = [[v.with_gens(gens) for v in r] for r in P]
    sign = 1
    prev = Polynomial.const(1, gens)
    for k in range(n - 1):
        if M[k][k].is_zero():
            swap = next((r for r in range(k + 1, n) if not M[r][k].is_zero()), None)
            if swap is None:
                return Polynomial.const(0, gens)
            M[k], M[swap] = M[swap], M[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = M[i][j] * M[k][k] - M[i][k] * M[k][j]
                M[i][j] = exquo(num, prev) if not prev.is_constant() else num * (1 / prev.constant_value())
            M[i][k] = Polynomial.const(0, gens)
        prev = M[k][k]
    d = M[n - 1][n - 1]
    return d if sign > 0 else -d


def charpoly(m: SymMatrix, indet: str = "u") -> Polynomial:
    """``det(indet*I - m)`` by the Faddeev-LeVerrier recursion.

    Entries must be polynomial; only integer divisions occur.

    Examples
    --------
    >>> from epikit.symalg import SymMatrix, Polynomial
    >>> str(charpoly(SymMatrix.identity(2), "u"))
    'u^2 - 2*u + 1'
    """
    if not m.is_square():
        raise ValueError("characteristic polynomial of a non-square matrix")
    if indet in m.free_symbols:
        raise ValueError(f"indeterminate {indet!r} already occurs in the matrix")
    A = m.polynomial_entries()
    n = m.rows
    gens: tuple[str, ...] = ()
    for r in A:
        for v in r:
            gens = _merge_gens(gens, v.gens)
    A = [[v.with_gens(gens) for v in r] for r in A]
    zero = Polynomial.const(0, gens)
    coeffs = [zero] * (n + 1)
    coeffs[n] = Polynomial.const(1, gens)
    Mk = [[zero] * n for _ in range(n)]
    for k in range(1, n + 1):
        # Mk <- A @ Mk + c_{n-k+1} I
        c_prev = coeffs[n - k + 1]
        AM = _matmul_poly(A, Mk, zero)
        for i in range(n):
            AM[i][i] = AM[i][i] + c_prev
        Mk = AM
        AMk = _matmul_poly(A, Mk, zero)
        tr = zero
        for i in range(n):
            tr = tr + AMk[i][i]
        coeffs[n - k] = tr * Fraction(-1, k)
    u = Polynomial.var(indet, _merge_gens((indet,), gens))
    out = Polynomial.const(0, u.gens)
    for k, c in enumerate(coeffs):
        if not c.is_zero():
            out = out + c.with_gens(u.gens) * u ** k
    return out


def _matmul_poly(A, B, zero):
    n = len(A)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = zero
            for k in range(n):
                if A[i][k].terms and B[k][j].terms:
                    acc = acc + A[i][k] * B[k][j]
            row.append(acc)
        out.append(row)
    return out


# block factorization -------------------------------------------------------------


def diagonal_blocks(m: SymMatrix) -> list[list[int]]:
    """Index sets of the diagonal blocks of a block-triangular permutation.

    Blocks are the strongly connected components of the directed graph with
    an edge ``i -> j`` whenever entry ``(i, j)`` is nonzero, listed in a
    topological order of the condensation.
    """
    n = m.rows
    g = nx.DiGraph()
    g.add_nodes_from(range(n))
    for i in range(n):
        for j in range(n):
            if i != j and not m[i, j].is_zero():
                g.add_edge(i, j)
    cond = nx.condensation(g)
    order = list(nx.topological_sort(cond))
    return [sorted(cond.nodes[c]["members"]) for c in order]


def _linear_candidates(block: SymMatrix, bound: int = 2) -> list[RationalFunction]:
    diag = [block[i, i] for i in range(block.rows)]
    cands: list[RationalFunction] = []
    seen = []

    def add(v):
        if not any(v == w for w in seen):
            seen.append(v)
            cands.append(v)

    for d in diag:
        add(d)
    if bound >= 2:
        for a, b in combinations(diag, 2):
            add(a + b)
            add(a - b)
            add(b - a)
    return cands


def factor_blocks(m: SymMatrix, indet: str = "u") -> list[Polynomial]:
    """Partial factorization of ``charpoly(m, indet)``.

    Returns monic polynomials in ``indet`` (coefficients in the parameters)
    whose product equals the characteristic polynomial. Blocks come from the
    strongly connected components of the nonzero pattern; inside a block,
    linear factors ``indet - d`` are split off by trial division with ``d``
    drawn from the block diagonal and pairwise sums/differences of it.
    """
    if not m.is_square():
        raise ValueError("factor_blocks needs a square matrix")
    factors: list[Polynomial] = []
    for idx in diagonal_blocks(m):
        block = m.submatrix(idx, idx)
        p = charpoly(block, indet)
        if p.degree(indet) == 1:
            factors.append(p)
            continue
        for d in _linear_candidates(block):
            if not d.is_polynomial():
                continue
            if p.degree(indet) <= 1:
                break
            dp = d.as_polynomial()
            lin = Polynomial.var(indet, _merge_gens((indet,), _merge_gens(p.gens, dp.gens))) - dp
            while p.degree(indet) > 1:
                try:
                    q = exquo(p, lin)
                except ValueError:
                    break
                factors.append(lin.with_gens(_merge_gens(p.gens, lin.gens)))
                p = q
        factors.append(p)
    return [f.compact() if f.free_symbols else f for f in factors]
