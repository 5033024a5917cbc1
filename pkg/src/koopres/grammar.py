"""Inline polynomial grammar and canonical text form.

EBNF::

    expr     = [sign] term { sign term } ;
    sign     = "+" | "-" ;
    term     = factor { ("*" | "/") factor } ;      (* "/" only by constants *)
    factor   = atom [ ("^" | "**") integer ] ;
    atom     = number [ "i" ] | "i" | ident | "(" expr ")" ;
    number   = digits [ "." digits ] [ ("e" | "E") [sign] digits ]
             | "." digits [ ("e" | "E") [sign] digits ] ;
    ident    = letter { letter | digit | "_" } ;     (* "i" is reserved *)

Decimal literals are read exactly (``0.3`` is ``3/10``).  The canonical
text form writes every term as ``(re+imi)*x^2*p^1`` in graded-lex order; it
round-trips exactly for Gaussian-rational coefficients.
"""

from __future__ import annotations

import re
from typing import Sequence

import sympy as sp

from .errors import PolynomialParseError
from .symbolic import CoordinateChart, MultiPolynomial

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>i(?![A-Za-z0-9_]))?
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<pow>\*\*|\^)
  | (?P<op>[-+*/()])
    """,
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise PolynomialParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            if m.group("num") is not None:
                tokens.append(("num", m.group("num"), m.group("imag") is not None, pos))
            elif m.group("ident") is not None:
                tokens.append(("ident", m.group("ident"), False, pos))
            elif m.group("pow") is not None:
                tokens.append(("pow", "^", False, pos))
            else:
                tokens.append(("op", m.group("op"), False, pos))
        pos = m.end()
    tokens.append(("end", "", False, len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, chart: CoordinateChart):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0
        self.chart = chart

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, kind, value=None):
        tok = self.take()
        if tok[0] != kind or (value is not None and tok[1] != value):
            want = value or kind
            raise PolynomialParseError(f"expected {want!r}, found {tok[1] or 'end of input'!r}", tok[3])
        return tok

    def parse(self) -> MultiPolynomial:
        if self.peek()[0] == "end":
            raise PolynomialParseError("empty expression", 0)
        out = self.expr()
        tok = self.peek()
        if tok[0] != "end":
            raise PolynomialParseError(f"unexpected token {tok[1]!r}", tok[3])
        return out

    def expr(self):
        sign = 1
        if self.peek()[:2] in (("op", "+"), ("op", "-")):
            sign = -1 if self.take()[1] == "-" else 1
        out = self.term() * sign
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self):
        out = self.factor()
        while self.peek()[:2] in (("op", "*"), ("op", "/")):
            op = self.take()
            rhs = self.factor()
            if op[1] == "*":
                out = out * rhs
            else:
                if rhs.degree > 0 or rhs.is_zero:
                    raise PolynomialParseError("division only by a nonzero constant", op[3])
                out = out / rhs.constant_term()
        return out

    def factor(self):
        base = self.atom()
        if self.peek()[0] == "pow":
            self.take()
            tok = self.take()
            if tok[0] != "num" or tok[2] or not tok[1].isdigit():
                raise PolynomialParseError("exponent must be a non-negative integer", tok[3])
            base = base ** int(tok[1])
        return base

    def atom(self):
        tok = self.take()
        kind, value, imag, pos = tok
        if kind == "num":
            c = sp.Rational(value)
            return MultiPolynomial.const(self.chart, c * sp.I if imag else c)
        if kind == "ident":
            if value == "i":
                return MultiPolynomial.const(self.chart, sp.I)
            if value not in self.chart.names:
                raise PolynomialParseError(f"unknown coordinate {value!r}", pos)
            return MultiPolynomial.var(self.chart, value)
        if (kind, value) == ("op", "("):
            inner = self.expr()
            self.expect("op", ")")
            return inner
        raise PolynomialParseError(f"unexpected token {value or 'end of input'!r}", pos)


def identifiers(text: str) -> list[str]:
    """Coordinate names used in ``text``, in order of first appearance."""
    seen = []
    for kind, value, _, _ in _tokenize(text):
        if kind == "ident" and value != "i" and value not in seen:
            seen.append(value)
    return seen


def parse_polynomial(text: str, chart: CoordinateChart | None = None) -> MultiPolynomial:
    """Parse ``text``; without ``chart`` a plain chart of the identifiers is used."""
    if chart is None:
        names = identifiers(text) or ["x"]
        chart = CoordinateChart.plain(names)
    return _Parser(text, chart).parse()


def parse_components(text: str, chart: CoordinateChart) -> list[MultiPolynomial]:
    """Comma-separated list of polynomials (vector field components)."""
    out = []
    offset = 0
    for part in text.split(","):
        try:
            out.append(parse_polynomial(part, chart))
        except PolynomialParseError as exc:
            raise PolynomialParseError(str(exc).rsplit(" at position", 1)[0], offset + exc.position) from None
        offset += len(part) + 1
    return out


def _format_real(x: sp.Expr) -> str:
    if x.is_Rational:
        return str(x)
    return repr(float(sp.N(x, 17)))


def format_coefficient(c: sp.Expr) -> str:
    if c.free_symbols:
        # symbolic parameters (gamma, omega) are shown as-is and are not re-parseable
        return f"({sp.sstr(c)})"
    re_, im_ = sp.re(c), sp.im(c)
    im_txt = _format_real(im_)
    sign = "" if im_txt.startswith("-") else "+"
    return f"({_format_real(re_)}{sign}{im_txt}i)"


def format_polynomial(poly: MultiPolynomial) -> str:
    if poly.is_zero:
        return "0"
    parts = []
    for exps, c in poly.items():
        factors = [format_coefficient(c)]
        factors += [f"{n}^{e}" for n, e in zip(poly.chart.names, exps) if e]
        parts.append("*".join(factors))
    return " + ".join(parts)


def format_pretty(poly: MultiPolynomial, digits: int = 12) -> str:
    """Human-oriented rendering with numeric coefficients, e.g. ``0.5i*P^2``."""
    if poly.is_zero:
        return "0"
    parts = []
    for exps, c in poly.items():
        z = complex(sp.N(c, 17)) if not c.free_symbols else None
        if z is None:
            coeff = f"({c})"
        else:
            re_, im_ = round(z.real, digits), round(z.imag, digits)
            if im_ == 0:
                coeff = f"{re_:g}"
            elif re_ == 0:
                coeff = f"{im_:g}i"
            else:
                coeff = f"({re_:g}{im_:+g}i)"
        mon = "*".join(n if e == 1 else f"{n}^{e}" for n, e in zip(poly.chart.names, exps) if e)
        parts.append(f"{coeff}*{mon}" if mon else coeff)
    return " + ".join(parts).replace("+ -", "- ")


def chart_for(names: Sequence[str]) -> CoordinateChart:
    return CoordinateChart.plain(list(names))
