"""Model definition language, non-negativity check and kinetic decomposition.

A model file looks like::

    model hethcote
    vars s i r
    params beta gam lam
    infectious i
    eq s' = -beta*s*i + lam*(1 - s)
    eq i' = i*(beta*s - (lam + gam))
    eq r' = gam*i - lam*r

Lines starting with ``#`` (or trailing ``# ...``) are comments. A file may
instead (or additionally) carry a ``sirph n=<k>`` section with matrix
literals; it is stored raw on :class:`Model` and interpreted by
:mod:`epikit.sirph`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .symalg import ParseError, Polynomial, RationalFunction, SymMatrix, parse_poly, parse_rational
from .symalg.polynomial import as_fraction

_NAME = re.compile(r"[A-Za-z_][A-Za-z_0-9]*\Z")
_EQ = re.compile(r"\s*([A-Za-z_][A-Za-z_0-9]*)\s*'\s*=(.*)\Z")
RESERVED = {"model", "vars", "params", "infectious", "eq", "sirph"}


@dataclass(frozen=True)
class SirphSection:
    """Raw ``sirph`` block: dimension plus parsed entries keyed by field name."""

    n: int
    fields: Mapping[str, object]
    line: int


@dataclass(frozen=True)
class Model:
    """Polynomial ODE model ``x' = rhs(x)``.

    ``rhs[k]`` is a :class:`Polynomial` over ``state_vars + params`` giving the
    derivative of ``state_vars[k]``. ``infectious`` holds indices into
    ``state_vars``.
    """

    name: str
    state_vars: tuple[str, ...]
    params: tuple[str, ...]
    rhs: tuple[Polynomial, ...]
    infectious: tuple[int, ...] | None = None
    sirph: SirphSection | None = field(default=None, compare=False)

    def __post_init__(self):
        if len(self.rhs) != len(self.state_vars):
            raise ValueError(f"{len(self.rhs)} equations for {len(self.state_vars)} state variables")
        names = self.state_vars + self.params
        if len(set(names)) != len(names):
            raise ValueError("duplicate symbol among state variables and parameters")
        allowed = set(names)
        fixed = []
        for k, p in enumerate(self.rhs):
            extra = p.free_symbols - allowed
            if extra:
                raise ValueError(f"equation for {self.state_vars[k]!r} uses undeclared {sorted(extra)}")
            fixed.append(p.with_gens(names))
        object.__setattr__(self, "rhs", tuple(fixed))
        if self.infectious is not None:
            inf = tuple(sorted(set(self.infectious)))
            if any(not 0 <= i < len(self.state_vars) for i in inf):
                raise ValueError("infectious index out of range")
            object.__setattr__(self, "infectious", inf)

    @property
    def gens(self) -> tuple[str, ...]:
        return self.state_vars + self.params

    @property
    def n(self) -> int:
        return len(self.state_vars)

    @property
    def infectious_vars(self) -> tuple[str, ...]:
        return tuple(self.state_vars[i] for i in (self.infectious or ()))

    def index(self, var: str) -> int:
        try:
            return self.state_vars.index(var)
        except ValueError:
            raise KeyError(f"{var!r} is not a state variable of {self.name}") from None

    def with_infectious(self, names: Sequence[str]) -> "Model":
        return Model(self.name, self.state_vars, self.params, self.rhs,
                     tuple(self.index(v) for v in names), self.sirph)

    def substitute_params(self, values: Mapping[str, object]) -> "Model":
        """Fix parameters to numbers or to expressions in the remaining parameters."""
        unknown = set(values) - set(self.params)
        if unknown:
            raise KeyError(f"unknown parameters {sorted(unknown)}")
        mapping = {}
        for k, v in values.items():
            if isinstance(v, str):
                v = parse_rational(v, self.params, set(self.params))
                if isinstance(v, RationalFunction):
                    raise ValueError(f"parameter {k} must be fixed to a polynomial expression")
            mapping[k] = v if isinstance(v, Polynomial) else as_fraction(v)
        remaining = tuple(p for p in self.params if p not in mapping)
        # values may mention other fixed names; substitute until none remain
        for _ in range(len(mapping) + 1):
            pending = [k for k, v in mapping.items() if isinstance(v, Polynomial) and v.free_symbols & set(mapping)]
            if not pending:
                break
            for k in pending:
                mapping[k] = mapping[k].subs({q: w for q, w in mapping.items() if q != k})
        else:
            raise ValueError("circular parameter fixings")
        gens = self.state_vars + remaining
        rhs = tuple(p.subs(mapping).with_gens(gens) for p in self.rhs)
        return Model(self.name, self.state_vars, remaining, rhs, self.infectious, self.sirph)

    def reorder(self, perm: Sequence[int]) -> "Model":
        """Permute state variables (and their equations)."""
        sv = tuple(self.state_vars[k] for k in perm)
        rhs = tuple(self.rhs[k] for k in perm)
        inf = None
        if self.infectious is not None:
            inv = {old: new for new, old in enumerate(perm)}
            inf = tuple(inv[i] for i in self.infectious)
        return Model(self.name, sv, self.params, rhs, inf, self.sirph)

    def rhs_callable(self, param_values: Mapping[str, object]):
        """Vectorised float right-hand side ``f(x)`` with parameters bound."""
        fixed = self.substitute_params({k: param_values[k] for k in self.params})
        fns = [p.to_callable(fixed.state_vars) for p in fixed.rhs]
        return lambda x: [fn(x) for fn in fns]


# parsing --------------------------------------------------------------------


def _strip_comment(line: str) -> str:
    k = line.find("#")
    return line if k < 0 else line[:k]


def _names(rest: str, lineno: int, col: int, what: str, taken: Sequence[str] = ()) -> list[str]:
    out = []
    for m in re.finditer(r"[^\s,]+", rest):
        tok = m.group(0)
        if not _NAME.match(tok) or tok in RESERVED:
            raise ParseError(f"invalid {what} name {tok!r}", lineno, col + m.start() + 1)
        if tok in out or tok in taken:
            raise ParseError(f"duplicate {what} {tok!r}", lineno, col + m.start() + 1)
        out.append(tok)
    return out


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "[":
            depth += 1
        elif ch == "]":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _parse_literal(text: str, params: set[str], lineno: int, col: int):
    """Scalar expression, vector ``[a, b]`` or matrix ``[[a, b], [c, d]]``."""
    s = text.strip()
    if s.startswith("["):
        if not s.endswith("]"):
            raise ParseError("unterminated matrix literal", lineno, col)
        inner = s[1:-1]
        if not inner.strip():
            raise ParseError("empty matrix literal", lineno, col)
        return [_parse_literal(p, params, lineno, col) for p in _split_top(inner)]
    return parse_poly(s, (), params, lineno, col)


def parse_model(text: str, name: str | None = None) -> Model:
    """Parse DSL source into a :class:`Model`.

    Raises
    ------
    ParseError
        On syntax errors, unknown or duplicate symbols and missing or
        repeated equations. The message carries line and column.
    """
    model_name = name
    vars_: list[str] | None = None
    params: list[str] = []
    infectious: list[tuple[str, int, int]] | None = None
    eqs: dict[str, tuple[str, int, int]] = {}
    sirph_n: int | None = None
    sirph_line = 0
    sirph_fields: dict[str, tuple[str, int, int]] = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        indent = len(line) - len(line.lstrip())
        stripped = line.strip()
        head, _, rest = stripped.partition(" ")
        rest_col = indent + len(head) + 2
        if head == "model":
            if not rest.strip() or not _NAME.match(rest.strip()):
                raise ParseError("model needs a single identifier name", lineno, rest_col)
            model_name = rest.strip()
        elif head == "vars":
            if vars_ is not None:
                raise ParseError("vars declared twice", lineno, indent + 1)
            vars_ = _names(rest, lineno, rest_col - 1, "variable")
        elif head == "params":
            params.extend(_names(rest, lineno, rest_col - 1, "parameter", params))
        elif head == "infectious":
            infectious = [(m.group(0), lineno, rest_col + m.start()) for m in re.finditer(r"[^\s,]+", rest)]
        elif head == "eq":
            m = _EQ.match(rest)
            if not m:
                raise ParseError("expected  eq <var>' = <expression>", lineno, rest_col)
            v = m.group(1)
            if v in eqs:
                raise ParseError(f"second equation for {v!r}", lineno, rest_col)
            eqs[v] = (m.group(2), lineno, indent + len(line.strip()) - len(m.group(2)) + 1)
        elif head == "sirph":
            mm = re.fullmatch(r"\s*n\s*=\s*(\d+)\s*", rest)
            if not mm or int(mm.group(1)) < 1:
                raise ParseError("expected  sirph n=<positive integer>", lineno, rest_col)
            sirph_n = int(mm.group(1))
            sirph_line = lineno
        elif sirph_n is not None and "=" in stripped:
            key, _, val = stripped.partition("=")
            key = key.strip()
            if key not in ("alpha", "A", "B", "delta", "Lambda", "gamma_s", "gamma_r"):
                raise ParseError(f"unknown sirph field {key!r}", lineno, indent + 1)
            sirph_fields[key] = (val, lineno, indent + len(stripped) - len(val) + 1)
        else:
            raise ParseError(f"unknown statement {head!r}", lineno, indent + 1)

    if len(set(params)) != len(params):
        dup = next(p for p in params if params.count(p) > 1)
        raise ParseError(f"duplicate parameter {dup!r}")
    pset = set(params)

    section = None
    if sirph_n is not None:
        parsed = {}
        for key, (val, ln, col) in sirph_fields.items():
            parsed[key] = _parse_literal(val, pset, ln, col)
        section = SirphSection(sirph_n, parsed, sirph_line)
        if vars_ is None and not eqs:
            vars_ = [f"i{k + 1}" for k in range(sirph_n)] + ["s", "r"]

    if vars_ is None:
        raise ParseError("missing vars declaration")
    if not vars_:
        raise ParseError("model needs at least one state variable")
    if len(set(vars_)) != len(vars_):
        dup = next(v for v in vars_ if vars_.count(v) > 1)
        raise ParseError(f"duplicate variable {dup!r}")
    clash = set(vars_) & pset
    if clash:
        raise ParseError(f"symbol {sorted(clash)[0]!r} declared as both variable and parameter")
    gens = tuple(vars_) + tuple(params)
    allowed = set(gens)

    inf_idx = None
    if infectious is not None:
        inf_idx = []
        for v, ln, col in infectious:
            if v not in vars_:
                raise ParseError(f"infectious entry {v!r} is not a state variable", ln, col)
            inf_idx.append(vars_.index(v))

    if section is not None and not eqs:
        # equations come from the sirph block
        from .sirph import spec_from_section, build_sirph

        spec = spec_from_section(section, tuple(params), tuple(vars_))
        m = build_sirph(spec, name=model_name or "sirph")
        if inf_idx is not None:
            m = Model(m.name, m.state_vars, m.params, m.rhs, tuple(inf_idx), section)
        return Model(m.name, m.state_vars, m.params, m.rhs, m.infectious, section)

    for v, (_, ln, col) in eqs.items():
        if v not in vars_:
            raise ParseError(f"equation for undeclared variable {v!r}", ln, col)
    missing = [v for v in vars_ if v not in eqs]
    if missing:
        raise ParseError(f"missing equation for {missing[0]!r} ({len(eqs)} equations for {len(vars_)} variables)")
    rhs = []
    for v in vars_:
        src, ln, col = eqs[v]
        rhs.append(parse_poly(src, gens, allowed, ln, col))
    return Model(model_name or "model", tuple(vars_), tuple(params), tuple(rhs),
                 tuple(inf_idx) if inf_idx is not None else None, section)


def load_model(path: str | Path) -> Model:
    path = Path(path)
    return parse_model(path.read_text(encoding="utf-8"), name=None)


def print_model(m: Model) -> str:
    """Canonical DSL text; ``parse_model(print_model(m)) == m``."""
    lines = [f"model {m.name}", "vars " + " ".join(m.state_vars)]
    if m.params:
        lines.append("params " + " ".join(m.params))
    if m.infectious is not None:
        lines.append("infectious " + " ".join(m.infectious_vars))
    for v, p in zip(m.state_vars, m.rhs):
        lines.append(f"eq {v}' = {p}")
    return "\n".join(lines) + "\n"


# Hungarian lemma ----------------------------------------------------------------


@dataclass(frozen=True)
class NonnegReport:
    ok: bool
    violations: tuple[tuple[int, Polynomial], ...]

    def describe(self, m: Model) -> list[str]:
        return [f"equation {i + 1} ({m.state_vars[i]}'): term {t}" for i, t in self.violations]


def check_hungarian(m: Model) -> NonnegReport:
    """Flag negative cross-effects.

    A term of equation ``i`` whose numeric coefficient is negative must
    contain ``state_vars[i]``; otherwise the orthant is not forward invariant
    for some positive parameter values. Parameters count as positive symbols.
    """
    bad = []
    for i, p in enumerate(m.rhs):
        for exp, c in p.sorted_terms():
            if c < 0 and exp[i] == 0:
                bad.append((i, Polynomial._raw(p.gens, {exp: c})))
    return NonnegReport(not bad, tuple(bad))


# kinetic decomposition -------------------------------------------------------------


@dataclass(frozen=True)
class LedgerTerm:
    """One expanded right-hand-side term: equation, signed parameter coefficient, state monomial."""

    eq: int
    coeff: Polynomial
    monomial: tuple[int, ...]


@dataclass(frozen=True)
class KineticDecomposition:
    """``rhs = S x^Y`` grouped by distinct state monomials.

    ``Y[k]`` is the exponent vector of column ``k``; ``S`` is the ``n x n_R``
    matrix of coefficient columns (parameter polynomials); ``term_ledger[k]``
    lists the ungrouped terms behind column ``k``.
    """

    state_vars: tuple[str, ...]
    Y: tuple[tuple[int, ...], ...]
    S: SymMatrix
    term_ledger: tuple[tuple[LedgerTerm, ...], ...]

    @property
    def n_columns(self) -> int:
        return len(self.Y)

    def monomial_strings(self) -> list[str]:
        out = []
        for y in self.Y:
            parts = [v if e == 1 else f"{v}^{e}" for v, e in zip(self.state_vars, y) if e]
            out.append("*".join(parts) or "1")
        return out

    def rank(self) -> int:
        return self.S.rank()

    def reconstruct(self) -> list[Polynomial]:
        n = len(self.state_vars)
        out = []
        for i in range(n):
            acc = None
            for k, y in enumerate(self.Y):
                c = self.S[i, k].as_polynomial()
                mono = Polynomial.monomial(self.state_vars, y)
                term = c * mono
                acc = term if acc is None else acc + term
            out.append(acc if acc is not None else Polynomial.const(0, self.state_vars))
        return out


def kinetic_decomposition(m: Model) -> KineticDecomposition:
    n = m.n
    cols: dict[tuple[int, ...], dict[int, dict]] = {}
    ledger: dict[tuple[int, ...], list[LedgerTerm]] = {}
    pgens = m.params
    for i, p in enumerate(m.rhs):
        for exp, c in p.sorted_terms():
            y, pe = exp[:n], exp[n:]
            cols.setdefault(y, {}).setdefault(i, {})
            cols[y][i][pe] = cols[y][i].get(pe, Fraction(0)) + c
            ledger.setdefault(y, []).append(LedgerTerm(i, Polynomial(pgens, {pe: c}), y))
    Ys = sorted((y for y in cols if any(cols[y][i] for i in cols[y])), reverse=True)
    S_rows = [[Polynomial(pgens, cols[y].get(i, {})) for y in Ys] for i in range(n)]
    if not Ys:
        S = SymMatrix([[0] for _ in range(n)])
    else:
        S = SymMatrix(S_rows)
    return KineticDecomposition(m.state_vars, tuple(Ys), S, tuple(tuple(ledger[y]) for y in Ys))


def model_jacobian(m: Model) -> SymMatrix:
    """Symbolic Jacobian, entry ``(i, j) = d rhs_i / d x_j``."""
    return SymMatrix([[p.diff(v) for v in m.state_vars] for p in m.rhs])
