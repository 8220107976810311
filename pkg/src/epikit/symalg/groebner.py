"""Lexicographic Groebner bases by Buchberger's algorithm.

Pairs are pruned with the Gebauer-Moeller criteria and selected by the
sugar strategy. Work is bounded by a budget on the number of S-pair
reductions; exhausting it raises :class:`GroebnerBudgetExceeded` with the
partial basis attached.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

from .polynomial import Polynomial

DEFAULT_BUDGET = 20000

Exp = tuple[int, ...]
Terms = dict[Exp, Fraction]


class GroebnerBudgetExceeded(RuntimeError):
    """Raised when the pair-reduction budget runs out."""

    def __init__(self, partial: list[Polynomial], budget: int):
        super().__init__(f"budget exhausted after {budget} pair reductions")
        self.partial = partial
        self.budget = budget


def lex_order(keep_symbols: Sequence[str], eliminate_symbols: Sequence[str]) -> tuple[str, ...]:
    """Generator tuple with eliminated symbols largest, then kept symbols."""
    return tuple(eliminate_symbols) + tuple(keep_symbols)


# monomial helpers -------------------------------------------------------------


def _divides(a: Exp, b: Exp) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: Exp, b: Exp) -> Exp:
    return tuple(max(x, y) for x, y in zip(a, b))


def _coprime(a: Exp, b: Exp) -> bool:
    return all(not (x and y) for x, y in zip(a, b))


def _sub(a: Exp, b: Exp) -> Exp:
    return tuple(x - y for x, y in zip(a, b))


class _Poly:
    """Monic polynomial with cached leading monomial and sugar degree."""

    __slots__ = ("terms", "lm", "sugar")

    def __init__(self, terms: Terms, sugar: int | None = None):
        lm = max(terms)
        lc = terms[lm]
        if lc != 1:
            inv = 1 / lc
            terms = {e: c * inv for e, c in terms.items()}
        self.terms = terms
        self.lm = lm
        self.sugar = max(sum(e) for e in terms) if sugar is None else sugar


def _normal_form(terms: Terms, basis: Sequence[_Poly], full: bool = True) -> Terms:
    p = dict(terms)
    r: Terms = {}
    while p:
        lt = max(p)
        c = p[lt]
        for g in basis:
            if _divides(g.lm, lt):
                d = _sub(lt, g.lm)
                for e, v in g.terms.items():
                    t = tuple(x + y for x, y in zip(e, d)) if any(d) else e
                    nv = p.get(t, 0) - c * v
                    if nv:
                        p[t] = nv
                    else:
                        p.pop(t, None)
                break
        else:
            if not full:
                r.update(p)
                return r
            r[lt] = c
            del p[lt]
    return r


def _spoly(f: _Poly, g: _Poly) -> tuple[Terms, int]:
    m = _lcm(f.lm, g.lm)
    df, dg = _sub(m, f.lm), _sub(m, g.lm)
    out: Terms = {}
    for e, c in f.terms.items():
        t = tuple(x + y for x, y in zip(e, df))
        out[t] = out.get(t, 0) + c
    for e, c in g.terms.items():
        t = tuple(x + y for x, y in zip(e, dg))
        nv = out.get(t, 0) - c
        if nv:
            out[t] = nv
        else:
            out.pop(t, None)
    sugar = max(f.sugar + sum(df), g.sugar + sum(dg))
    return out, sugar


def _interreduce(polys: list[_Poly]) -> list[_Poly]:
    # minimal basis, then tail reduction
    polys = sorted(polys, key=lambda p: p.lm)
    minimal = []
    for i, p in enumerate(polys):
        if any(_divides(q.lm, p.lm) for j, q in enumerate(polys) if j != i and (q.lm != p.lm or j < i)):
            continue
        minimal.append(p)
    out = []
    for i, p in enumerate(minimal):
        others = [q for j, q in enumerate(minimal) if j != i]
        tail = {e: c for e, c in p.terms.items() if e != p.lm}
        red = _normal_form(tail, others) if tail else {}
        red[p.lm] = Fraction(1)
        out.append(_Poly(red, p.sugar))
    return sorted(out, key=lambda p: p.lm)


def _to_poly(gens, terms: Terms) -> Polynomial:
    return Polynomial._raw(gens, dict(terms))


def _buchberger(polys: list[_Poly], budget: int, gens) -> list[_Poly]:
    store: list[_Poly] = []
    active: list[int] = []
    pairs: list[tuple[int, int]] = []

    def update(h_idx: int):
        nonlocal pairs, active
        h = store[h_idx]
        cand = [g for g in active]
        # Gebauer-Moeller: criterion on new pairs
        keep_new: list[int] = []
        lcms = {g: _lcm(h.lm, store[g].lm) for g in cand}
        for idx, g in enumerate(cand):
            lg = lcms[g]
            if _coprime(h.lm, store[g].lm):
                keep_new.append(g)
                continue
            dominated = False
            for g2 in cand[idx + 1:]:
                if _divides(lcms[g2], lg):
                    dominated = True
                    break
            if not dominated:
                for g2 in keep_new:
                    if _divides(lcms[g2], lg):
                        dominated = True
                        break
            if not dominated:
                keep_new.append(g)
        # drop equal-lcm duplicates and coprime pairs (product criterion)
        new_pairs = []
        seen_lcm = set()
        for g in keep_new:
            lg = lcms[g]
            if lg in seen_lcm:
                continue
            seen_lcm.add(lg)
            if not _coprime(h.lm, store[g].lm):
                new_pairs.append((g, h_idx))
        # old pairs made redundant by h
        kept = []
        for (a, b) in pairs:
            l_ab = _lcm(store[a].lm, store[b].lm)
            if (_divides(h.lm, l_ab) and _lcm(store[a].lm, h.lm) != l_ab
                    and _lcm(store[b].lm, h.lm) != l_ab):
                continue
            kept.append((a, b))
        pairs = kept + new_pairs
        active = [g for g in active if not _divides(h.lm, store[g].lm)] + [h_idx]

    for p in sorted(polys, key=lambda q: q.lm):
        red = _normal_form(p.terms, [store[g] for g in active])
        if not red:
            continue
        store.append(_Poly(red, p.sugar))
        update(len(store) - 1)

    used = 0
    while pairs:
        # sugar selection, ties broken by lcm (smallest first)
        best = min(range(len(pairs)), key=lambda k: (
            max(store[pairs[k][0]].sugar + sum(_sub(_lcm(store[pairs[k][0]].lm, store[pairs[k][1]].lm), store[pairs[k][0]].lm)),
                store[pairs[k][1]].sugar + sum(_sub(_lcm(store[pairs[k][0]].lm, store[pairs[k][1]].lm), store[pairs[k][1]].lm))),
            _lcm(store[pairs[k][0]].lm, store[pairs[k][1]].lm)))
        a, b = pairs.pop(best)
        used += 1
        if used > budget:
            partial = _interreduce([store[g] for g in active])
            raise GroebnerBudgetExceeded([_to_poly(gens, p.terms) for p in partial], budget)
        s, sugar = _spoly(store[a], store[b])
        if not s:
            continue
        red = _normal_form(s, [store[g] for g in active])
        if not red:
            continue
        store.append(_Poly(red, sugar))
        update(len(store) - 1)
    return _interreduce([store[g] for g in active])


def gb_lex(generators: Iterable[Polynomial], keep_symbols: Sequence[str] = (),
           eliminate_symbols: Sequence[str] = (), budget: int = DEFAULT_BUDGET) -> list[Polynomial]:
    """Reduced lexicographic Groebner basis.

    Parameters
    ----------
    generators : iterable of Polynomial
        Ideal generators; every symbol must be listed in ``keep_symbols`` or
        ``eliminate_symbols``.
    keep_symbols, eliminate_symbols : sequence of str
        Disjoint symbol lists. The order is ``eliminate_symbols`` (largest)
        followed by ``keep_symbols``, so basis elements free of the
        eliminated symbols generate the elimination ideal.
    budget : int
        Maximum number of S-pair reductions.

    Returns
    -------
    list of Polynomial
        Monic basis elements sorted by increasing leading monomial, all over
        the generator tuple ``eliminate_symbols + keep_symbols``.

    Raises
    ------
    GroebnerBudgetExceeded
        If more than ``budget`` pair reductions are needed.
    """
    gens = lex_order(keep_symbols, eliminate_symbols)
    if len(set(gens)) != len(gens):
        raise ValueError("keep_symbols and eliminate_symbols must be disjoint")
    polys = []
    for g in generators:
        extra = g.free_symbols - set(gens)
        if extra:
            raise ValueError(f"undeclared symbols {sorted(extra)} in generator")
        g = g.with_gens(gens) if g.gens != gens else g
        if g.terms:
            polys.append(_Poly(dict(g.terms)))
    if not polys:
        return []
    basis = _buchberger(polys, budget, gens)
    return [_to_poly(gens, p.terms) for p in basis]


def elimination_part(basis: Sequence[Polynomial], eliminate_symbols: Sequence[str]) -> list[Polynomial]:
    """Basis elements that do not involve any eliminated symbol."""
    elim = set(eliminate_symbols)
    return [p for p in basis if not (p.free_symbols & elim)]


def reduce(p: Polynomial, basis: Sequence[Polynomial], gens: Sequence[str] | None = None) -> Polynomial:
    """Fully reduced normal form of ``p`` modulo ``basis`` in lex order on ``gens``."""
    if gens is None:
        gens = basis[0].gens if basis else p.gens
    gens = tuple(gens)
    bs = [_Poly(dict(b.with_gens(gens).terms)) for b in basis if b.terms]
    pp = p.with_gens(gens)
    return _to_poly(gens, _normal_form(pp.terms, bs))


def s_polynomial(f: Polynomial, g: Polynomial) -> Polynomial:
    """S-polynomial of the monic versions of ``f`` and ``g`` (lex on ``f.gens``)."""
    g = g.with_gens(f.gens)
    s, _ = _spoly(_Poly(dict(f.terms)), _Poly(dict(g.terms)))
    return _to_poly(f.gens, s)


def is_groebner(basis: Sequence[Polynomial]) -> bool:
    """Buchberger's criterion: every S-polynomial reduces to zero."""
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            if not reduce(s_polynomial(basis[i], basis[j]), basis).is_zero():
                return False
    return True
