"""Rational functions over Q and a best-effort multivariate gcd.

The gcd uses a recursive primitive pseudo-remainder sequence. It is only
attempted when both operands have total degree at most ``GCD_MAX_DEGREE``;
otherwise fractions are kept with only their rational content removed.
Equality never depends on reduction: it is tested by cross-multiplication.
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Mapping

from .polynomial import Polynomial, as_fraction, exquo, _merge_gens

GCD_MAX_DEGREE = 8
GCD_MAX_TERMS = 400
GCD_MAX_SHARED = 4


# gcd -------------------------------------------------------------------------


def _first_var(a: Polynomial, b: Polynomial) -> str | None:
    used = set(a.used_positions()) | set(b.used_positions())
    for k, g in enumerate(a.gens):
        if k in used:
            return g
    return None


def _content_in(p: Polynomial, var: str) -> Polynomial:
    """gcd of the coefficients of ``p`` viewed as a polynomial in ``var``."""
    g = Polynomial.const(0, p.gens)
    for c in sorted(p.coeffs_in(var).values(), key=lambda q: len(q.terms)):
        g = poly_gcd(g, c)
        if g.is_constant():
            return Polynomial.const(1, p.gens)
    return g


def _prem(f: Polynomial, g: Polynomial, var: str) -> Polynomial:
    dg = g.degree(var)
    lg = g.leading_coeff_in(var)
    x = Polynomial.var(var, f.gens)
    r = f
    while not r.is_zero() and r.degree(var) >= dg:
        dr = r.degree(var)
        r = lg * r - r.leading_coeff_in(var) * (x ** (dr - dg)) * g
    return r


def _pp_in(p: Polynomial, var: str) -> Polynomial:
    c = _content_in(p, var)
    return exquo(p, c) if not c.is_constant() else p


def _coprime_certificate(a: Polynomial, b: Polynomial, seed: int = 0) -> bool:
    """True only if ``gcd(a, b)`` is provably constant.

    For each shared variable the others are specialised to random integers
    that keep both leading coefficients nonzero; the specialised gcd then has
    degree at least that of the true gcd, so a constant result is a proof.
    """
    from .roots import _deg, _gcd, to_dense

    rng = random.Random(seed)
    shared = a.free_symbols & b.free_symbols
    if not shared:
        return True
    for v in sorted(shared):
        others = (a.free_symbols | b.free_symbols) - {v}
        for _ in range(3):
            pt = {o: rng.randint(2, 97) for o in others}
            sa, sb = a.subs(pt), b.subs(pt)
            if sa.degree(v) == a.degree(v) and sb.degree(v) == b.degree(v):
                break
        else:
            return False
        if _deg(_gcd(to_dense(sa)[0], to_dense(sb)[0])) >= 1:
            return False
    return True


def poly_gcd(a: Polynomial, b: Polynomial) -> Polynomial:
    """Greatest common divisor, primitive with positive leading coefficient.

    ``gcd(0, 0)`` is ``0``; a nonzero constant gcd is returned as ``1``.
    """
    a, b = a._align(b)
    if a.is_zero():
        return b.primitive()
    if b.is_zero():
        return a.primitive()
    if a.is_constant() or b.is_constant():
        return Polynomial.const(1, a.gens)
    var = _first_var(a, b)
    da, db = a.degree(var), b.degree(var)
    if da == 0:
        return poly_gcd(a, _content_in(b, var))
    if db == 0:
        return poly_gcd(_content_in(a, var), b)
    ca, cb = _content_in(a, var), _content_in(b, var)
    pa = exquo(a, ca) if not ca.is_constant() else a
    pb = exquo(b, cb) if not cb.is_constant() else b
    if da < db:
        pa, pb = pb, pa
    while True:
        r = _prem(pa, pb, var)
        if r.is_zero():
            g = pb
            break
        if r.degree(var) == 0:
            g = Polynomial.const(1, a.gens)
            break
        pa, pb = pb, _pp_in(r, var)
    c = poly_gcd(ca, cb) if not (ca.is_constant() or cb.is_constant()) else Polynomial.const(1, a.gens)
    return (c * g).primitive()


# rational functions -------------------------------------------------------------


class RationalFunction:
    """Quotient ``num / den`` of polynomials over a common generator tuple."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None, reduce: bool = True):
        if not isinstance(num, Polynomial):
            num = Polynomial.const(as_fraction(num), den.gens if isinstance(den, Polynomial) else ())
        if den is None:
            den = Polynomial.const(1, num.gens)
        elif not isinstance(den, Polynomial):
            den = Polynomial.const(as_fraction(den), num.gens)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        num, den = num._align(den)
        if num.is_zero():
            den = Polynomial.const(1, num.gens)
        else:
            if reduce and not den.is_constant():
                num, den = _cancel(num, den)
            c = den.content()
            if den.leading_coeff() < 0:
                c = -c
            if c != 1:
                num, den = num * (1 / c), den * (1 / c)
        self.num = num
        self.den = den

    @property
    def gens(self) -> tuple[str, ...]:
        return self.num.gens

    @classmethod
    def lift(cls, value, gens=()) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            return value
        if isinstance(value, Polynomial):
            return cls(value, Polynomial.const(1, value.gens), reduce=False)
        return cls(Polynomial.const(as_fraction(value), gens), reduce=False)

    # predicates -----------------------------------------------------------

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def __bool__(self) -> bool:
        return not self.num.is_zero()

    def is_polynomial(self) -> bool:
        return self.den.is_constant()

    def as_polynomial(self) -> Polynomial:
        if not self.den.is_constant():
            raise ValueError(f"{self} is not a polynomial")
        return self.num * (1 / self.den.constant_value())

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def constant_value(self) -> Fraction:
        return self.num.constant_value() / self.den.constant_value()

    @property
    def free_symbols(self) -> frozenset[str]:
        return self.num.free_symbols | self.den.free_symbols

    # arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, Polynomial):
            return RationalFunction(other, reduce=False)
        try:
            return RationalFunction(Polynomial.const(as_fraction(other), self.gens), reduce=False)
        except (TypeError, ValueError):
            return None

    def __neg__(self):
        return RationalFunction(-self.num, self.den, reduce=False)

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            return self
        if self.num.is_zero():
            return o
        if self.den == o.den:
            return RationalFunction(self.num + o.num, self.den)
        if o.den.is_constant():
            return RationalFunction(self.num + o.num * self.den * (1 / o.den.constant_value()), self.den, reduce=False)
        if self.den.is_constant():
            return RationalFunction(self.num * o.den * (1 / self.den.constant_value()) + o.num, o.den, reduce=False)
        return RationalFunction(self.num * o.den + o.num * self.den, self.den * o.den)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if self.num.is_zero() or o.num.is_zero():
            return RationalFunction(Polynomial.const(0, _merge_gens(self.gens, o.gens)), reduce=False)
        if self.den.is_constant() and o.den.is_constant():
            return RationalFunction(self.num * o.num, self.den * o.den, reduce=False)
        return RationalFunction(self.num * o.num, self.den * o.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        if o.num.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return self * RationalFunction(o.den, o.num, reduce=False)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise ValueError("integer powers only")
        if k < 0:
            return RationalFunction(self.den ** (-k), self.num ** (-k), reduce=False)
        return RationalFunction(self.num ** k, self.den ** k, reduce=False)

    # comparison -------------------------------------------------------------

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self.num * o.den - o.num * self.den).is_zero()

    def __hash__(self) -> int:
        # equal values may have different representations; hash is coarse
        return hash(self.free_symbols)

    # calculus, substitution, evaluation ------------------------------------

    def diff(self, var: str) -> "RationalFunction":
        if self.den.is_constant():
            return RationalFunction(self.num.diff(var), self.den, reduce=False)
        n, d = self.num, self.den
        return RationalFunction(n.diff(var) * d - n * d.diff(var), d * d)

    def subs(self, mapping: Mapping[str, object]) -> "RationalFunction":
        return subs_rational(self.num, mapping) / subs_rational(self.den, mapping)

    def evaluate(self, values: Mapping[str, object]) -> Fraction:
        d = self.den.evaluate(values)
        if d == 0:
            raise ZeroDivisionError(f"denominator of {self} vanishes")
        return self.num.evaluate(values) / d

    def to_callable(self, names):
        fn = self.num.to_callable(names)
        fd = self.den.to_callable(names)
        return lambda x: fn(x) / fd(x)

    def with_gens(self, gens) -> "RationalFunction":
        return RationalFunction(self.num.with_gens(gens), self.den.with_gens(gens), reduce=False)

    def __str__(self) -> str:
        if self.den == 1:
            return str(self.num)
        n = str(self.num)
        d = str(self.den)
        if len(self.num.terms) > 1:
            n = f"({n})"
        if len(self.den.terms) > 1 or "*" in d:
            d = f"({d})"
        return f"{n}/{d}"

    def __repr__(self) -> str:
        return f"RationalFunction({str(self)!r})"


def _cancel(num: Polynomial, den: Polynomial) -> tuple[Polynomial, Polynomial]:
    # cheap exact-division checks first
    if len(den.terms) == 1 and len(num.terms) >= 1:
        # monomial denominator: cancel common variable powers
        (dexp, dc), = den.terms.items()
        low = [min(e[k] for e in num.terms) for k in range(len(num.gens))]
        common = tuple(min(a, b) for a, b in zip(low, dexp))
        if any(common):
            m = Polynomial.monomial(num.gens, common)
            return exquo(num, m), exquo(den, m)
        return num, den
    if num.degree() > GCD_MAX_DEGREE or den.degree() > GCD_MAX_DEGREE:
        return num, den
    if len(num.terms) > GCD_MAX_TERMS or len(den.terms) > GCD_MAX_TERMS:
        return num, den
    if _coprime_certificate(num, den):
        return num, den
    if len(num.free_symbols & den.free_symbols) > GCD_MAX_SHARED:
        q = _try_exquo(num, den)
        return (q, Polynomial.const(1, num.gens)) if q is not None else (num, den)
    g = poly_gcd(num, den)
    if g.is_constant():
        return num, den
    return exquo(num, g), exquo(den, g)


def _try_exquo(a: Polynomial, b: Polynomial) -> Polynomial | None:
    try:
        return exquo(a, b)
    except ValueError:
        return None


def as_rational(value, gens=()) -> RationalFunction:
    return RationalFunction.lift(value, gens)


def subs_rational(p, mapping: Mapping[str, object]) -> RationalFunction:
    """Substitute polynomials, rational functions or numbers into ``p``.

    Uses a single common denominator ``prod d_k ** deg_k(p)`` so the work
    stays in polynomial arithmetic.
    """
    if isinstance(p, RationalFunction):
        return p.subs(mapping)
    direct = {}
    frac = {}
    for k, v in mapping.items():
        if k not in p.gens:
            continue
        if isinstance(v, RationalFunction):
            if v.den.is_constant():
                direct[k] = v.num * (1 / v.den.constant_value())
            else:
                frac[k] = v
        else:
            direct[k] = v
    q = p.subs(direct) if direct else p
    if not frac or q.is_zero():
        return RationalFunction(q, reduce=False)
    gens = q.gens
    for v in frac.values():
        gens = _merge_gens(gens, v.gens)
    degs = {k: q.degree(k) for k in frac}
    total_den = Polynomial.const(1, gens)
    for k, v in frac.items():
        total_den = total_den * v.den.with_gens(gens) ** degs[k]
    # group the terms of q by exponents of the substituted variables
    idx = {k: q.gens.index(k) for k in frac if k in q.gens}
    keep = [g for g in q.gens if g not in frac]
    keep_idx = [j for j, g in enumerate(q.gens) if g not in frac]
    groups: dict[tuple, dict] = {}
    for exp, c in q.terms.items():
        key = tuple(exp[idx[k]] if k in idx else 0 for k in frac)
        rest = tuple(exp[j] for j in keep_idx)
        groups.setdefault(key, {})[rest] = c
    names = list(frac)
    num_pows: dict[tuple[str, int], Polynomial] = {}
    den_pows: dict[tuple[str, int], Polynomial] = {}

    def npow(k, e):
        if (k, e) not in num_pows:
            num_pows[(k, e)] = frac[k].num.with_gens(gens) ** e
        return num_pows[(k, e)]

    def dpow(k, e):
        if (k, e) not in den_pows:
            den_pows[(k, e)] = frac[k].den.with_gens(gens) ** e
        return den_pows[(k, e)]

    total = Polynomial.const(0, gens)
    for key, terms in groups.items():
        part = Polynomial(tuple(keep), terms).with_gens(gens)
        for k, e in zip(names, key):
            part = part * npow(k, e) * dpow(k, degs[k] - e)
        total = total + part
    # the only likely common factors are the substituted denominators
    factors = []
    for k, v in frac.items():
        factors += [v.den.with_gens(gens)] * degs[k]
    rest = []
    for d in factors:
        q = None if total.is_zero() else _try_exquo(total, d)
        if q is None:
            rest.append(d)
        else:
            total = q
    den = Polynomial.const(1, gens)
    for d in rest:
        den = den * d
    return RationalFunction(total, den)
