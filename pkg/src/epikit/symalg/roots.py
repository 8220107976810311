"""Real root isolation for univariate rational polynomials (Sturm + bisection)."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .polynomial import Polynomial, as_fraction

Dense = list[Fraction]  # lowest degree first


@dataclass(frozen=True)
class RealRoot:
    """An isolated real root.

    Attributes
    ----------
    lo, hi : Fraction
        Isolating interval, ``hi - lo`` below the requested width. Equal when
        the root is rational and was found exactly.
    value : float
        Midpoint approximation.
    multiplicity : int
        Multiplicity from the square-free decomposition.
    """

    lo: Fraction
    hi: Fraction
    value: float
    multiplicity: int = 1

    @property
    def exact(self) -> Fraction | None:
        return self.lo if self.lo == self.hi else None


# dense univariate arithmetic --------------------------------------------------


def _trim(a: Dense) -> Dense:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return a


def _deg(a: Dense) -> int:
    return len(a) - 1


def _divmod(a: Dense, b: Dense) -> tuple[Dense, Dense]:
    a = _trim(a)
    b = _trim(b)
    if not b:
        raise ZeroDivisionError("division by zero polynomial")
    if len(a) < len(b):
        return [], a
    q = [Fraction(0)] * (len(a) - len(b) + 1)
    r = list(a)
    lb = b[-1]
    for k in range(len(a) - len(b), -1, -1):
        c = r[k + len(b) - 1] / lb
        q[k] = c
        if c:
            for j, bj in enumerate(b):
                r[k + j] -= c * bj
    return _trim(q), _trim(r[: len(b) - 1])


def _gcd(a: Dense, b: Dense) -> Dense:
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, _divmod(a, b)[1]
    if not a:
        return a
    lc = a[-1]
    return [c / lc for c in a]


def _deriv(a: Dense) -> Dense:
    return _trim([k * a[k] for k in range(1, len(a))])


def _sub(a: Dense, b: Dense) -> Dense:
    n = max(len(a), len(b))
    return _trim([(a[k] if k < len(a) else 0) - (b[k] if k < len(b) else 0) for k in range(n)])


def _eval(a: Dense, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _sign(v) -> int:
    return (v > 0) - (v < 0)


def to_dense(p: Polynomial | Sequence) -> tuple[Dense, str | None]:
    """Dense coefficient list (lowest first) and the variable name."""
    if not isinstance(p, Polynomial):
        return _trim([as_fraction(c) for c in p]), None
    syms = p.free_symbols
    if len(syms) > 1:
        raise ValueError(f"expected a univariate polynomial, got symbols {sorted(syms)}")
    if not syms:
        return _trim([p.constant_term()]), None
    (var,) = syms
    return _trim([c.constant_value() if c.terms else Fraction(0) for c in p.univariate_coeffs(var)]), var


def squarefree_decomposition(a: Dense) -> list[tuple[Dense, int]]:
    """Yun's algorithm: ``a = lc * prod f_k^k`` with each ``f_k`` square-free."""
    a = _trim(a)
    if _deg(a) < 1:
        return []
    out = []
    da = _deriv(a)
    b = _gcd(a, da)
    c = _divmod(a, b)[0]
    d = _sub(_divmod(da, b)[0], _deriv(c))
    k = 1
    while _deg(c) >= 1:
        g = _gcd(c, d)
        if _deg(g) >= 1:
            out.append((g, k))
        c = _divmod(c, g)[0]
        d = _sub(_divmod(d, g)[0], _deriv(c))
        k += 1
    return out


def sturm_sequence(a: Dense) -> list[Dense]:
    seq = [_trim(a), _deriv(a)]
    while seq[-1]:
        r = _divmod(seq[-2], seq[-1])[1]
        if not r:
            break
        seq.append([-c for c in r])
    return [s for s in seq if s]


def sign_variations(seq: list[Dense], x: Fraction) -> int:
    signs = [s for s in (_sign(_eval(p, x)) for p in seq) if s]
    return sum(1 for u, v in zip(signs, signs[1:]) if u != v)


def count_roots(a: Dense, lo: Fraction, hi: Fraction) -> int:
    """Distinct real roots in ``(lo, hi]`` via Sturm's theorem."""
    seq = sturm_sequence(a)
    return sign_variations(seq, lo) - sign_variations(seq, hi)


def _isolate(f: Dense, seq, lo: Fraction, hi: Fraction, out: list):
    # roots of square-free f in (lo, hi]
    n = sign_variations(seq, lo) - sign_variations(seq, hi)
    if n == 0:
        return
    if n == 1:
        out.append((lo, hi))
        return
    mid = (lo + hi) / 2
    _isolate(f, seq, lo, mid, out)
    _isolate(f, seq, mid, hi, out)


def _refine(f: Dense, lo: Fraction, hi: Fraction, width: Fraction) -> tuple[Fraction, Fraction]:
    # f has exactly one root in (lo, hi]
    if _eval(f, hi) == 0:
        return hi, hi
    # f(lo) may vanish when lo is a neighbouring root, so compare against f(hi)
    shi = _sign(_eval(f, hi))
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = _sign(_eval(f, mid))
        if s == 0:
            return mid, mid
        if s == shi:
            hi = mid
        else:
            lo = mid
    # try a small rational snap
    guess = ((lo + hi) / 2).limit_denominator(10 ** 6)
    if lo <= guess <= hi and _eval(f, guess) == 0:
        return guess, guess
    return lo, hi


def real_roots(p, interval: tuple[object, object] | None = None, width: float = 1e-12) -> list[RealRoot]:
    """Isolate and refine the real roots of ``p`` in the closed ``interval``.

    Parameters
    ----------
    p : Polynomial or sequence
        Univariate polynomial, or dense coefficients lowest degree first.
    interval : (lo, hi), optional
        Search interval; defaults to a Cauchy bound covering every root.
    width : float
        Target width of the isolating intervals.

    Returns
    -------
    list of RealRoot
        Sorted ascending, one entry per distinct root.
    """
    a, _ = to_dense(p)
    if not a:
        raise ValueError("zero polynomial has no isolated roots")
    if _deg(a) == 0:
        return []
    if interval is None:
        bound = 1 + max(abs(c / a[-1]) for c in a[:-1])
        lo, hi = -bound, bound
    else:
        lo, hi = as_fraction(interval[0]), as_fraction(interval[1])
    if lo > hi:
        raise ValueError("empty interval")
    w = as_fraction(width)
    found: list[RealRoot] = []
    for f, mult in squarefree_decomposition(a):
        seq = sturm_sequence(f)
        if _eval(f, lo) == 0:
            found.append(RealRoot(lo, lo, float(lo), mult))
        boxes: list = []
        _isolate(f, seq, lo, hi, boxes)
        for blo, bhi in boxes:
            rlo, rhi = _refine(f, blo, bhi, w)
            found.append(RealRoot(rlo, rhi, float((rlo + rhi) / 2), mult))
    found.sort(key=lambda r: (r.lo, r.hi))
    return found
