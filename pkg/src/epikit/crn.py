"""Chemical reaction network view of a polynomial model.

Terms of the right-hand side sharing a rate monomial (a product of
parameters) and a state monomial are grouped; the signed numeric
coefficients across equations form a direction ``d``. With ``kappa`` the
positive rational making ``d / kappa`` a primitive integer vector, the group
becomes the reaction ``y -> y + d / kappa`` with rate constant
``kappa * (parameter monomial)``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import networkx as nx

from .modeldsl import Model, kinetic_decomposition
from .symalg import Polynomial


class CrnError(ValueError):
    """Raised when the model cannot be written as a mass-action network."""


Complex = tuple[int, ...]


@dataclass(frozen=True)
class Reaction:
    source: Complex
    product: Complex
    rate: Polynomial  # single positive monomial in the parameters

    @property
    def vector(self) -> tuple[int, ...]:
        return tuple(p - s for s, p in zip(self.source, self.product))


def format_complex(c: Complex, species: Sequence[str]) -> str:
    parts = []
    for name, k in zip(species, c):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{k}{name}")
    return "+".join(parts) if parts else "0"


@dataclass(frozen=True)
class CrnGraph:
    """Reactions, complexes and the derived Feinberg-Horn-Jackson structure."""

    species: tuple[str, ...]
    params: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    @property
    def complexes(self) -> tuple[Complex, ...]:
        seen: dict[Complex, None] = {}
        for r in self.reactions:
            seen.setdefault(r.source)
            seen.setdefault(r.product)
        return tuple(seen)

    @property
    def n_V(self) -> int:
        return len(self.complexes)

    @property
    def n_R(self) -> int:
        return len(self.reactions)

    @property
    def sources(self) -> tuple[Complex, ...]:
        return tuple(dict.fromkeys(r.source for r in self.reactions))

    def graph(self) -> nx.MultiDiGraph:
        g = nx.MultiDiGraph()
        g.add_nodes_from(self.complexes)
        for r in self.reactions:
            g.add_edge(r.source, r.product, rate=str(r.rate))
        return g

    @property
    def linkage_classes(self) -> list[list[Complex]]:
        g = self.graph()
        order = {c: k for k, c in enumerate(sorted(self.complexes))}
        classes = [sorted(cc, key=order.get) for cc in nx.weakly_connected_components(g)]
        return sorted(classes, key=lambda cc: order[cc[0]])

    @property
    def stoich_rank(self) -> int:
        return rational_rank([r.vector for r in self.reactions])

    @property
    def deficiency(self) -> int:
        return self.n_V - self.stoich_rank - len(self.linkage_classes)

    @property
    def weakly_reversible(self) -> bool:
        g = nx.DiGraph(self.graph())
        return all(nx.is_strongly_connected(g.subgraph(cc)) for cc in self.linkage_classes)

    def label(self, c: Complex) -> str:
        return format_complex(c, self.species)

    def reconstruct(self) -> list[Polynomial]:
        """Mass-action right-hand side ``sum rate * x^source * (product - source)``."""
        gens = self.species + self.params
        out = [Polynomial.const(0, gens) for _ in self.species]
        for r in self.reactions:
            mono = Polynomial.monomial(gens, r.source + (0,) * len(self.params))
            flux = r.rate.with_gens(gens) * mono
            for k, v in enumerate(r.vector):
                if v:
                    out[k] = out[k] + flux * v
        return out

    def to_dot(self, name: str = "crn") -> str:
        lines = [f"digraph {json.dumps(name)} {{", "  rankdir=LR;"]
        for c in self.complexes:
            lines.append(f"  {json.dumps(self.label(c))};")
        for r in self.reactions:
            lines.append(f"  {json.dumps(self.label(r.source))} -> {json.dumps(self.label(r.product))}"
                         f" [label={json.dumps(str(r.rate))}];")
        lines.append("}")
        return "\n".join(lines) + "\n"


def rational_rank(rows: Sequence[Sequence[object]]) -> int:
    """Rank over the rationals by exact Gaussian elimination."""
    M = [[Fraction(v) for v in r] for r in rows]
    if not M:
        return 0
    rank, ncols = 0, len(M[0])
    for c in range(ncols):
        piv = next((r for r in range(rank, len(M)) if M[r][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        for r in range(rank + 1, len(M)):
            if M[r][c]:
                f = M[r][c] / M[rank][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[rank])]
        rank += 1
    return rank


def _primitive_scale(d: Sequence[Fraction]) -> Fraction:
    """Positive ``kappa`` with ``d / kappa`` a primitive integer vector."""
    nz = [x for x in d if x]
    den = math.lcm(*(x.denominator for x in nz))
    num = math.gcd(*(int(x * den) for x in nz))
    return Fraction(num, den)


def to_crn(m: Model) -> CrnGraph:
    """Infer a mass-action network from the expanded right-hand side.

    Raises
    ------
    CrnError
        If a term group would need a negative product complex.
    """
    kd = kinetic_decomposition(m)
    n = m.n
    groups: dict[tuple[tuple[int, ...], Complex], list[Fraction]] = {}
    for col in kd.term_ledger:
        for t in col:
            (pe, c), = t.coeff.terms.items()
            d = groups.setdefault((pe, t.monomial), [Fraction(0)] * n)
            d[t.eq] += c
    reactions = []
    for (pe, y), d in groups.items():
        if not any(d):
            continue
        kappa = _primitive_scale(d)
        step = [int(x / kappa) for x in d]
        product = tuple(a + b for a, b in zip(y, step))
        rate = Polynomial(m.params, {pe: kappa})
        if min(product) < 0:
            mono = format_complex(y, m.state_vars)
            raise CrnError(f"not mass-action realizable with integer complexes: term group "
                           f"{rate} * [{mono}] with direction {[str(x) for x in d]}")
        reactions.append(Reaction(tuple(y), product, rate))
    return CrnGraph(m.state_vars, m.params, tuple(reactions))


def crn_stats(g: CrnGraph) -> dict:
    """Summary counts, re-derived and cross-checked against the graph."""
    if not g.reactions:
        return {"n_species": len(g.species), "n_V": 0, "n_R": 0, "n_s": 0, "linkage_classes": 0,
                "stoich_rank": 0, "deficiency": 0, "weakly_reversible": True,
                "complexes": [], "reactions": []}
    classes = g.linkage_classes
    rank = g.stoich_rank
    deficiency = g.n_V - rank - len(classes)
    if deficiency < 0 or rank > min(len(g.species), g.n_R):
        raise AssertionError("inconsistent network counts")
    assert sum(len(c) for c in classes) == g.n_V
    return {
        "n_species": len(g.species),
        "n_V": g.n_V,
        "n_R": g.n_R,
        "n_s": len(g.sources),
        "linkage_classes": len(classes),
        "stoich_rank": rank,
        "deficiency": deficiency,
        "weakly_reversible": g.weakly_reversible,
        "complexes": [g.label(c) for c in g.complexes],
        "reactions": [{"source": g.label(r.source), "product": g.label(r.product), "rate": str(r.rate)}
                      for r in g.reactions],
    }
