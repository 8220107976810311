"""Recursive-descent parser for polynomial and rational expressions.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | NAME | '(' expr ')'

Numbers may be integers, decimals (read exactly) or written as ``a/b``
through the division operator. Exponents must evaluate to non-negative
integers.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .polynomial import Polynomial
from .ratfunc import RationalFunction

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^()]))"
)


class ParseError(ValueError):
    """Syntax or symbol error with a 1-based line/column position."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.reason = message


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    col: int


def _tokenize(text: str, line: int, col0: int) -> list[_Tok]:
    toks = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            bad = len(text[pos:]) - len(text[pos:].lstrip())
            raise ParseError(f"unexpected character {text[pos + bad]!r}", line, col0 + pos + bad)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), col0 + start))
        pos = m.end()
    toks.append(_Tok("end", "", col0 + len(text)))
    return toks


class _Parser:
    def __init__(self, text: str, gens: tuple[str, ...], allowed: set[str] | None, line: int, col0: int):
        self.toks = _tokenize(text, line, col0)
        self.k = 0
        self.gens = gens
        self.allowed = allowed
        self.line = line

    def peek(self) -> _Tok:
        return self.toks[self.k]

    def take(self) -> _Tok:
        t = self.toks[self.k]
        self.k += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, self.line, tok.col)

    def parse(self):
        if self.peek().kind == "end":
            self.error("empty expression")
        val = self.expr()
        if self.peek().kind != "end":
            self.error(f"unexpected token {self.peek().text!r}")
        return val

    def expr(self):
        val = self.term()
        while self.peek().text in ("+", "-") and self.peek().kind == "op":
            op = self.take().text
            rhs = self.term()
            val = val + rhs if op == "+" else val - rhs
        return val

    def term(self):
        val = self.unary()
        while self.peek().kind == "op" and self.peek().text in ("*", "/"):
            tok = self.take()
            rhs = self.unary()
            if tok.text == "*":
                val = val * rhs
            else:
                if rhs.is_zero():
                    self.error("division by zero", tok)
                val = _to_rf(val, self.gens) / _to_rf(rhs, self.gens)
                val = _maybe_poly(val)
        return val

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("+", "-"):
            self.take()
            val = self.unary()
            return -val if tok.text == "-" else val
        return self.power()

    def power(self):
        base = self.atom()
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("^", "**"):
            self.take()
            etok = self.peek()
            e = self.unary()
            try:
                k = _maybe_poly(e).constant_value()
            except (ValueError, AttributeError):
                self.error("exponent must be a constant", etok)
            if k.denominator != 1 or k < 0:
                self.error(f"exponent must be a non-negative integer, got {k}", etok)
            return base ** int(k)
        return base

    def atom(self):
        tok = self.take()
        if tok.kind == "num":
            return Polynomial.const(Fraction(tok.text), self.gens)
        if tok.kind == "name":
            if self.allowed is not None and tok.text not in self.allowed:
                raise ParseError(f"unknown symbol {tok.text!r}", self.line, tok.col)
            return Polynomial.var(tok.text, self.gens)
        if tok.kind == "op" and tok.text == "(":
            val = self.expr()
            close = self.take()
            if close.text != ")":
                self.error("expected ')'", close)
            return val
        self.error(f"unexpected token {tok.text or 'end of input'!r}", tok)


def _to_rf(v, gens) -> RationalFunction:
    if isinstance(v, RationalFunction):
        return v
    return RationalFunction(v, Polynomial.const(1, v.gens))


def _maybe_poly(v):
    if isinstance(v, RationalFunction) and v.den.is_constant():
        return v.num * (1 / v.den.constant_value())
    return v


def parse_rational(text: str, gens: Iterable[str] = (), allowed: set[str] | None = None,
                   line: int = 1, column: int = 1):
    """Parse ``text`` into a :class:`Polynomial` or :class:`RationalFunction`.

    Parameters
    ----------
    text : str
        Expression source.
    gens : iterable of str
        Preferred generator order for the result.
    allowed : set of str, optional
        If given, any other identifier raises :class:`ParseError`.
    line, column : int
        Position of ``text`` inside a larger document, for error messages.
    """
    return _Parser(text, tuple(gens), allowed, line, column).parse()


def parse_poly(text: str, gens: Iterable[str] = (), allowed: set[str] | None = None,
               line: int = 1, column: int = 1) -> Polynomial:
    """Parse a polynomial expression; a non-polynomial quotient is an error."""
    val = parse_rational(text, gens, allowed, line, column)
    if isinstance(val, RationalFunction):
        raise ParseError("expression is not a polynomial (non-constant denominator)", line, column)
    return val
