"""Pratt parser for the scalar-field expression grammar.

Grammar: identifiers ``[A-Za-z_][A-Za-z0-9_]*``; integer literals (``n/m``
rationals are ordinary division, folded to an exact constant); binary
``+ - * / ^`` with ``^`` tightest and right-associative; unary minus;
``sqrt sin cos exp`` applied to a parenthesized argument.
"""

from __future__ import annotations

import re
from typing import Mapping

from .expr import FUNCTIONS, UNARY, Chart, Expr, add, const, div, mul, neg, power, sub, var


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class UnknownIdentifierError(ParseError):
    pass


_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z0-9_]*)|(.))")

# left binding powers
_BP = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_MINUS_BP = 25


class _Parser:
    def __init__(self, text: str, names: Mapping[str, str]):
        self.text = text
        self.names = names
        self.tokens = self._tokenize(text)
        self.pos = 0

    @staticmethod
    def _tokenize(text):
        out = []
        i = 0
        while i < len(text):
            m = _TOKEN.match(text, i)
            if m is None or m.end() == i:
                break
            start = m.start(m.lastindex) if m.lastindex else m.end()
            if m.group(1):
                out.append(("num", m.group(1), start))
            elif m.group(2):
                out.append(("ident", m.group(2), start))
            elif m.group(3):
                ch = m.group(3)
                if ch.isspace():
                    i = m.end()
                    continue
                if ch not in "+-*/^()":
                    raise ParseError(f"unexpected character {ch!r}", start, text)
                out.append(("op", ch, start))
            i = m.end()
        out.append(("end", "", len(text)))
        return out

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, value):
        kind, text, at = self.advance()
        if text != value or kind == "end":
            found = "end of input" if kind == "end" else repr(text)
            raise ParseError(f"expected {value!r}, found {found}", at, self.text)

    def expression(self, rbp: int = 0) -> Expr:
        left = self.nud(self.advance())
        while True:
            kind, text, at = self.peek()
            if kind != "op" or text not in _BP or _BP[text] <= rbp:
                break
            self.advance()
            left = self.led(text, at, left)
        return left

    def nud(self, tok) -> Expr:
        kind, text, at = tok
        if kind == "num":
            return const(int(text))
        if kind == "ident":
            if text in FUNCTIONS and self.peek()[1] == "(":
                self.advance()
                arg = self.expression()
                self.expect(")")
                return UNARY[text](arg)
            if text not in self.names:
                raise UnknownIdentifierError(f"unknown identifier {text!r}", at, self.text)
            return var(self.names[text])
        if kind == "op" and text == "(":
            inner = self.expression()
            self.expect(")")
            return inner
        if kind == "op" and text == "-":
            return neg(self.expression(_UNARY_MINUS_BP))
        if kind == "op" and text == "+":
            return self.expression(_UNARY_MINUS_BP)
        found = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {found}", at, self.text)

    def led(self, op: str, at: int, left: Expr) -> Expr:
        if op == "^":
            exponent = self.expression(_BP["^"] - 1)
            if not exponent.is_const or exponent.value.denominator != 1:
                raise ParseError("exponent must be an integer constant", at, self.text)
            return power(left, exponent.value.numerator)
        right = self.expression(_BP[op])
        return {"+": add, "-": sub, "*": mul, "/": div}[op](left, right)


def parse_expr(text: str, chart: Chart | Mapping[str, str] | None = None,
               aliases: Mapping[str, str] | None = None) -> Expr:
    """Parse ``text`` into an expression over the coordinates of ``chart``.

    ``aliases`` maps extra spellings to chart names (``u_x`` -> ``p``).
    Raises ParseError (with ``.position``) on bad syntax and
    UnknownIdentifierError on names outside the chart.
    """
    if chart is None:
        names: dict[str, str] = {}
    elif isinstance(chart, Chart):
        names = {n: n for n in chart.names}
    else:
        names = dict(chart)
    if aliases:
        for alias, target in aliases.items():
            names.setdefault(alias, target)
    p = _Parser(text, names)
    if p.peek()[0] == "end":
        raise ParseError("empty expression", 0, text)
    e = p.expression()
    kind, tok, at = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {tok!r}", at, text)
    return e
