"""Sparse multivariate polynomials with exact rational coefficients.

A :class:`Polynomial` carries an ordered tuple of generator names and a map
from exponent tuples to :class:`fractions.Fraction` coefficients. Binary
operations between polynomials over different generator tuples first merge
the generators (left operand's order first), so callers rarely need to
align rings by hand.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


def as_fraction(value) -> Fraction:
    """Convert ints, Fractions, decimal strings and floats to ``Fraction``.

    Floats go through their shortest ``repr`` so that ``0.32`` becomes
    ``8/25`` rather than the exact binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if not np.isfinite(value):
            raise ValueError(f"non-finite coefficient {value!r}")
        return Fraction(float.__repr__(value))
    if isinstance(value, (np.integer,)):
        return Fraction(int(value))
    if isinstance(value, (np.floating,)):
        return as_fraction(float(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot interpret {value!r} as a rational number")


def _merge_gens(a: Sequence[str], b: Sequence[str]) -> tuple[str, ...]:
    if tuple(a) == tuple(b):
        return tuple(a)
    seen = set(a)
    return tuple(a) + tuple(g for g in b if g not in seen)


class Polynomial:
    """Immutable polynomial over Q in the generators ``gens``."""

    __slots__ = ("gens", "terms", "_key")

    def __init__(self, gens: Iterable[str] = (), terms: Mapping[Exponent, object] | None = None):
        gens = tuple(gens)
        if len(set(gens)) != len(gens):
            raise ValueError(f"duplicate generators in {gens}")
        clean: dict[Exponent, Fraction] = {}
        n = len(gens)
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n:
                raise ValueError(f"exponent {exp} does not match generators {gens}")
            if any(e < 0 for e in exp):
                raise ValueError(f"negative exponent {exp}")
            c = as_fraction(c)
            if c:
                clean[exp] = clean.get(exp, Fraction(0)) + c
                if not clean[exp]:
                    del clean[exp]
        self.gens = gens
        self.terms = clean
        self._key = None

    # construction helpers -------------------------------------------------

    @classmethod
    def _raw(cls, gens: tuple[str, ...], terms: dict[Exponent, Fraction]) -> "Polynomial":
        # trusted constructor: terms already clean
        p = object.__new__(cls)
        p.gens = gens
        p.terms = terms
        p._key = None
        return p

    @classmethod
    def const(cls, value, gens: Iterable[str] = ()) -> "Polynomial":
        gens = tuple(gens)
        c = as_fraction(value)
        return cls._raw(gens, {(0,) * len(gens): c} if c else {})

    @classmethod
    def var(cls, name: str, gens: Iterable[str] | None = None) -> "Polynomial":
        gens = (name,) if gens is None else tuple(gens)
        if name not in gens:
            gens = gens + (name,)
        exp = tuple(1 if g == name else 0 for g in gens)
        return cls._raw(gens, {exp: Fraction(1)})

    @classmethod
    def monomial(cls, gens: Sequence[str], exp: Exponent, coeff=1) -> "Polynomial":
        return cls(tuple(gens), {tuple(exp): coeff})

    # generator handling ----------------------------------------------------

    def with_gens(self, gens: Iterable[str]) -> "Polynomial":
        """Re-embed into ``gens``; every generator actually used must be present."""
        gens = tuple(gens)
        if gens == self.gens:
            return self
        index = {g: k for k, g in enumerate(gens)}
        used = self.used_positions()
        for k in used:
            if self.gens[k] not in index:
                raise ValueError(f"generator {self.gens[k]!r} missing from {gens}")
        pos = [index.get(g) for g in self.gens]
        n = len(gens)
        terms = {}
        for exp, c in self.terms.items():
            new = [0] * n
            for k, e in enumerate(exp):
                if e:
                    new[pos[k]] = e
            terms[tuple(new)] = c
        return Polynomial._raw(gens, terms)

    def used_positions(self) -> list[int]:
        used = set()
        for exp in self.terms:
            used.update(k for k, e in enumerate(exp) if e)
        return sorted(used)

    @property
    def free_symbols(self) -> frozenset[str]:
        return frozenset(self.gens[k] for k in self.used_positions())

    def compact(self) -> "Polynomial":
        """Drop generators that do not occur."""
        return self.with_gens([self.gens[k] for k in self.used_positions()])

    def _align(self, other: "Polynomial") -> tuple["Polynomial", "Polynomial"]:
        if self.gens == other.gens:
            return self, other
        gens = _merge_gens(self.gens, other.gens)
        return self.with_gens(gens), other.with_gens(gens)

    def _coerce(self, other) -> "Polynomial | None":
        if isinstance(other, Polynomial):
            return other
        try:
            return Polynomial.const(as_fraction(other), self.gens)
        except (TypeError, ValueError):
            return None

    # predicates -------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return all(not any(exp) for exp in self.terms)

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return next(iter(self.terms.values()), Fraction(0))

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * len(self.gens), Fraction(0))

    # arithmetic -----------------------------------------------------------

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw(self.gens, {e: -c for e, c in self.terms.items()})

    def __pos__(self) -> "Polynomial":
        return self

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        a, b = self._align(o)
        terms = dict(a.terms)
        for e, c in b.terms.items():
            v = terms.get(e)
            if v is None:
                terms[e] = c
            else:
                v = v + c
                if v:
                    terms[e] = v
                else:
                    del terms[e]
        return Polynomial._raw(a.gens, terms)

    def __radd__(self, other):
        return self.__add__(other)

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
        if isinstance(other, Polynomial):
            a, b = self._align(other)
            if len(b.terms) == 1 and len(a.terms) > 1:
                a, b = b, a
            terms: dict[Exponent, Fraction] = {}
            for e1, c1 in a.terms.items():
                for e2, c2 in b.terms.items():
                    e = tuple(x + y for x, y in zip(e1, e2))
                    v = terms.get(e)
                    terms[e] = c1 * c2 if v is None else v + c1 * c2
            return Polynomial._raw(a.gens, {e: c for e, c in terms.items() if c})
        try:
            c = as_fraction(other)
        except (TypeError, ValueError):
            return NotImplemented
        if not c:
            return Polynomial._raw(self.gens, {})
        return Polynomial._raw(self.gens, {e: v * c for e, v in self.terms.items()})

    def __rmul__(self, other):
        return self.__mul__(other)

    def __pow__(self, k: int) -> "Polynomial":
        if not isinstance(k, int) or k < 0:
            raise ValueError("polynomial powers must be non-negative integers")
        result = Polynomial.const(1, self.gens)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def __truediv__(self, other):
        if isinstance(other, Polynomial):
            if other.is_constant():
                return self * (1 / other.constant_value())
            from .ratfunc import RationalFunction

            return RationalFunction(self, other)
        c = as_fraction(other)
        if not c:
            raise ZeroDivisionError("polynomial division by zero")
        return self * (1 / c)

    def __rtruediv__(self, other):
        from .ratfunc import RationalFunction

        return RationalFunction(Polynomial.const(as_fraction(other), self.gens), self)

    # comparison -------------------------------------------------------------

    def _canonical(self):
        if self._key is None:
            self._key = frozenset(
                (tuple(sorted((g, e) for g, e in zip(self.gens, exp) if e)), c) for exp, c in self.terms.items()
            )
        return self._key

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._canonical() == other._canonical()
        if hasattr(other, "num") and hasattr(other, "den"):
            return NotImplemented
        try:
            c = as_fraction(other)
        except (TypeError, ValueError):
            return NotImplemented
        return self.is_constant() and self.constant_value() == c

    def __hash__(self) -> int:
        return hash(self._canonical())

    # structure --------------------------------------------------------------

    def _pos(self, var: str) -> int | None:
        try:
            return self.gens.index(var)
        except ValueError:
            return None

    def degree(self, var: str | None = None) -> int:
        """Degree in ``var`` (total degree when omitted); ``-1`` for zero."""
        if not self.terms:
            return -1
        if var is None:
            return max(sum(e) for e in self.terms)
        k = self._pos(var)
        if k is None:
            return 0
        return max(e[k] for e in self.terms)

    def coeffs_in(self, var: str) -> dict[int, "Polynomial"]:
        """Coefficients as polynomials (same gens) keyed by the power of ``var``."""
        k = self._pos(var)
        if k is None:
            return {0: self} if self.terms else {}
        out: dict[int, dict] = {}
        for exp, c in self.terms.items():
            d = exp[k]
            e = exp[:k] + (0,) + exp[k + 1:]
            out.setdefault(d, {})[e] = c
        return {d: Polynomial._raw(self.gens, t) for d, t in out.items()}

    def univariate_coeffs(self, var: str) -> list["Polynomial"]:
        """Dense coefficient list, lowest power first."""
        cs = self.coeffs_in(var)
        if not cs:
            return []
        zero = Polynomial._raw(self.gens, {})
        return [cs.get(d, zero) for d in range(max(cs) + 1)]

    @classmethod
    def from_univariate(cls, coeffs: Sequence["Polynomial"], var: str, gens: Sequence[str] | None = None) -> "Polynomial":
        x = cls.var(var, gens if gens is not None else (coeffs[0].gens if coeffs else ()))
        result = Polynomial.const(0, x.gens)
        power = Polynomial.const(1, x.gens)
        for c in coeffs:
            result = result + c * power
            power = power * x
        return result

    def leading_coeff_in(self, var: str) -> "Polynomial":
        cs = self.coeffs_in(var)
        return cs[max(cs)] if cs else Polynomial._raw(self.gens, {})

    def leading_term(self, order: Sequence[str] | None = None) -> tuple[Exponent, Fraction]:
        """Lex-leading (exponent, coefficient) with respect to ``order`` (default: gens)."""
        if not self.terms:
            raise ValueError("zero polynomial has no leading term")
        if order is None:
            exp = max(self.terms)
            return exp, self.terms[exp]
        p = self.with_gens(_merge_gens(order, self.gens))
        exp = max(p.terms)
        return exp, p.terms[exp]

    def leading_coeff(self) -> Fraction:
        return self.leading_term()[1]

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), reverse=True)

    def numeric_coeffs(self) -> list[Fraction]:
        return list(self.terms.values())

    def content(self) -> Fraction:
        """Positive rational c with ``self / c`` integral and primitive."""
        if not self.terms:
            return Fraction(0)
        from math import gcd, lcm

        num = 0
        den = 1
        for c in self.terms.values():
            num = gcd(num, c.numerator)
            den = lcm(den, c.denominator)
        return Fraction(num, den)

    def primitive(self) -> "Polynomial":
        """Integral primitive part with positive lex-leading coefficient."""
        if not self.terms:
            return self
        c = self.content()
        if self.leading_coeff() < 0:
            c = -c
        return self * (1 / c)

    def monic(self) -> "Polynomial":
        if not self.terms:
            return self
        return self * (1 / self.leading_coeff())

    # calculus and substitution ------------------------------------------------

    def diff(self, var: str) -> "Polynomial":
        k = self._pos(var)
        if k is None:
            return Polynomial._raw(self.gens, {})
        terms = {}
        for exp, c in self.terms.items():
            e = exp[k]
            if e:
                terms[exp[:k] + (e - 1,) + exp[k + 1:]] = c * e
        return Polynomial._raw(self.gens, terms)

    def subs(self, mapping: Mapping[str, object]) -> "Polynomial":
        """Substitute numbers or polynomials for generators.

        Substituted generators are removed from the result's gens unless the
        replacement reintroduces them.
        """
        mapping = {k: v for k, v in mapping.items() if k in self.gens}
        if not mapping:
            return self
        keep = [g for g in self.gens if g not in mapping]
        keep_idx = [k for k, g in enumerate(self.gens) if g not in mapping]
        sub_idx = [(k, g) for k, g in enumerate(self.gens) if g in mapping]
        poly_vals = {}
        num_vals = {}
        gens = tuple(keep)
        for _, g in sub_idx:
            v = mapping[g]
            if isinstance(v, Polynomial):
                if v.is_constant():
                    num_vals[g] = v.constant_value()
                else:
                    poly_vals[g] = v
                    gens = _merge_gens(gens, v.gens)
            else:
                num_vals[g] = as_fraction(v)
        # group terms by the part that stays
        grouped: dict[Exponent, dict] = {}
        for exp, c in self.terms.items():
            rest = tuple(exp[k] for k in keep_idx)
            coeff = c
            poly_part = []
            for k, g in sub_idx:
                e = exp[k]
                if not e:
                    continue
                if g in num_vals:
                    coeff = coeff * num_vals[g] ** e
                else:
                    poly_part.append((g, e))
            if not coeff:
                continue
            key = tuple(poly_part)
            grouped.setdefault(key, {})
            grouped[key][rest] = grouped[key].get(rest, Fraction(0)) + coeff
        result = Polynomial.const(0, gens)
        base_gens = tuple(keep)
        powers: dict[tuple[str, int], Polynomial] = {}
        for key, terms in grouped.items():
            part = Polynomial(base_gens, terms).with_gens(gens)
            for g, e in key:
                if (g, e) not in powers:
                    powers[(g, e)] = poly_vals[g].with_gens(gens) ** e
                part = part * powers[(g, e)]
            result = result + part
        return result

    def evaluate(self, values: Mapping[str, object]):
        """Exact value when every used generator is given rational values."""
        total = Fraction(0)
        vals = []
        for k in range(len(self.gens)):
            g = self.gens[k]
            vals.append(as_fraction(values[g]) if g in values else None)
        for exp, c in self.terms.items():
            t = c
            for k, e in enumerate(exp):
                if e:
                    if vals[k] is None:
                        raise KeyError(self.gens[k])
                    t *= vals[k] ** e
            total += t
        return total

    def to_callable(self, names: Sequence[str]) -> Callable[[np.ndarray], float]:
        """Fast float evaluator taking values ordered as ``names``."""
        p = self.with_gens(_merge_gens(names, self.gens))
        extra = [g for g in p.gens[len(names):] if g in p.free_symbols]
        if extra:
            raise ValueError(f"unbound symbols {extra} in numeric evaluation")
        n = len(names)
        if not p.terms:
            return lambda x: 0.0
        exps = np.array([e[:n] for e in p.terms], dtype=float)
        coefs = np.array([float(c) for c in p.terms.values()])

        def f(x):
            x = np.asarray(x, dtype=float)
            return float(coefs @ np.prod(np.power(x[None, :], exps), axis=1))

        return f

    # display ----------------------------------------------------------------

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(g if e == 1 else f"{g}^{e}" for g, e in zip(self.gens, exp) if e)
            mag = abs(c)
            sign = "-" if c < 0 else "+"
            if mono:
                body = mono if mag == 1 else f"{_fmt(mag)}*{mono}"
            else:
                body = _fmt(mag)
            parts.append((sign, body))
        first_sign, first = parts[0]
        out = ("-" if first_sign == "-" else "") + first
        for sign, body in parts[1:]:
            out += f" {sign} {body}"
        return out

    def __repr__(self) -> str:
        return f"Polynomial({str(self)!r}, gens={self.gens})"


def _fmt(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def symbols(names: str | Sequence[str]) -> tuple[Polynomial, ...]:
    """``x, y = symbols("x y")`` over the common generator tuple."""
    if isinstance(names, str):
        names = names.replace(",", " ").split()
    gens = tuple(names)
    return tuple(Polynomial.var(g, gens) for g in gens)


def exquo(a: Polynomial, b: Polynomial) -> Polynomial:
    """Exact quotient ``a / b``; raises ``ValueError`` if ``b`` does not divide ``a``."""
    if b.is_zero():
        raise ZeroDivisionError("exquo by zero polynomial")
    a, b = a._align(b)
    if b.is_constant():
        return a * (1 / b.constant_value())
    lb_exp = max(b.terms)
    lb = b.terms[lb_exp]
    rem = dict(a.terms)
    quot: dict[Exponent, Fraction] = {}
    bterms = list(b.terms.items())
    while rem:
        m = max(rem)
        c = rem[m]
        d = tuple(x - y for x, y in zip(m, lb_exp))
        if any(x < 0 for x in d):
            raise ValueError("polynomial division is not exact")
        q = c / lb
        quot[d] = quot.get(d, Fraction(0)) + q
        for e, v in bterms:
            t = tuple(x + y for x, y in zip(e, d))
            nv = rem.get(t, Fraction(0)) - q * v
            if nv:
                rem[t] = nv
            else:
                rem.pop(t, None)
    return Polynomial._raw(a.gens, {e: c for e, c in quot.items() if c})


def divides(b: Polynomial, a: Polynomial) -> bool:
    try:
        exquo(a, b)
    except ValueError:
        return False
    return True
