"""
Parser and canonical printer for polynomial germ expressions.

Grammar (whitespace ignored)::

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') unary)?
    atom   := NUMBER | IMAG | 'i' | 'j' | VAR | '(' expr ')'

``VAR`` is ``z1`` .. ``zn``; ``IMAG`` is a number with an ``i`` or ``j``
suffix such as ``2.5i``.  Exponents must evaluate to integer constants.
Division is allowed by any series with a nonzero constant term.

The printer writes monomials in graded-lex order with ``(a+bi)``
coefficient literals using ``repr`` floats, so printing and re-parsing
reproduces the coefficients exactly.
"""
import math
import re
from fractions import Fraction

import numpy as np

from .errors import ExpressionSyntaxError, NonGermError
from .series import TruncatedMapGerm, TruncatedSeries

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)(?P<imag>[ij])?(?![A-Za-z0-9_.])
  | (?P<var>z(?P<idx>\d+))
  | (?P<unit>[ij])(?![A-Za-z0-9_])
  | (?P<op>\*\*|[-+*/^()])
    """,
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionSyntaxError(f"unexpected character {text[pos]!r} at position {pos} in {text!r}")
        pos = m.end()
        if m.group("ws"):
            continue
        if m.group("num") is not None:
            value = float(m.group("num"))
            tokens.append(("num", complex(0, value) if m.group("imag") else complex(value), m.start()))
        elif m.group("var") is not None:
            tokens.append(("var", int(m.group("idx")), m.start()))
        elif m.group("unit") is not None:
            tokens.append(("num", 1j, m.start()))
        else:
            tokens.append(("op", m.group("op"), m.start()))
    tokens.append(("end", None, len(text)))
    return tokens


class _Parser:
    def __init__(self, text, n, cap):
        self.text = text
        self.n = n
        self.cap = cap
        self.tokens = _tokenize(text)
        self.pos = 0

    def error(self, msg):
        tok = self.tokens[self.pos]
        return ExpressionSyntaxError(f"{msg} at position {tok[2]} in {self.text!r}")

    def peek(self):
        return self.tokens[self.pos]

    def take(self, value=None):
        tok = self.tokens[self.pos]
        if value is not None and (tok[0] != "op" or tok[1] != value):
            raise self.error(f"expected {value!r}")
        self.pos += 1
        return tok

    def at_op(self, *ops):
        tok = self.peek()
        return tok[0] == "op" and tok[1] in ops

    def parse(self):
        if self.peek()[0] == "end":
            raise self.error("empty expression")
        value = self.expr()
        if self.peek()[0] != "end":
            raise self.error("unexpected trailing input")
        return value

    def expr(self):
        value = self.term()
        while self.at_op("+", "-"):
            op = self.take()[1]
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self):
        value = self.unary()
        while self.at_op("*", "/"):
            op = self.take()[1]
            rhs = self.unary()
            if op == "*":
                value = value * rhs
            else:
                try:
                    value = value / _as_scalar(rhs) if _is_constant(rhs) else value / rhs
                except ZeroDivisionError:
                    raise self.error("division by zero or by a series without constant term") from None
        return value

    def unary(self):
        if self.at_op("-"):
            self.take()
            return -self.unary()
        if self.at_op("+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        base = self.atom()
        if self.at_op("^", "**"):
            self.take()
            exponent = self.unary()
            if not _is_constant(exponent):
                raise self.error("exponent must be a constant")
            e = _as_scalar(exponent)
            if e.imag != 0 or e.real != int(e.real):
                raise self.error(f"exponent {e} is not an integer")
            try:
                base = base ** int(e.real)
            except ZeroDivisionError:
                raise self.error("negative power of a series without constant term") from None
        return base

    def atom(self):
        kind, value, _ = self.peek()
        if kind == "num":
            self.take()
            return TruncatedSeries.constant(value, self.n, self.cap)
        if kind == "var":
            if not 1 <= value <= self.n:
                raise self.error(f"variable z{value} outside z1..z{self.n}")
            self.take()
            return TruncatedSeries.variable(value - 1, self.n, self.cap)
        if self.at_op("("):
            self.take()
            inner = self.expr()
            self.take(")")
            return inner
        raise self.error("expected a number, variable or '('")


def _is_constant(f):
    return not np.any(f.coeffs[1:])


def _as_scalar(f):
    return complex(f.coeffs[0])


def parse_series(text, n, cap):
    """Parse one expression into a :class:`TruncatedSeries`."""
    return _Parser(text, n, cap).parse()


def parse_germ(texts, n, cap):
    """Parse ``n`` component expressions into a :class:`TruncatedMapGerm`.

    Raises
    ------
    ExpressionSyntaxError
        Malformed expression.
    NonGermError
        Some component has a nonzero constant term.
    SingularLinearPartError
        The linear part is not invertible.
    """
    texts = list(texts)
    if len(texts) != n:
        raise ExpressionSyntaxError(f"{len(texts)} expressions given for dimension {n}")
    comps = [parse_series(t, n, cap) for t in texts]
    for i, c in enumerate(comps):
        if c.coeffs[0] != 0:
            raise NonGermError(f"component {i + 1} ({texts[i]!r}) has constant term {c.coeffs[0]:g}")
    return TruncatedMapGerm(comps)


def parse_constant(text):
    """Parse a scalar: decimal, rational ``p/q`` (exact before rounding) or complex literal."""
    text = str(text).strip()
    try:
        return complex(float(Fraction(text)))
    except (ValueError, ZeroDivisionError):
        pass
    value = parse_series(text, 0, 0)
    return _as_scalar(value)


def _fmt_float(x):
    if x == 0:
        return "0.0"
    return repr(float(x))


def format_number(c):
    """Canonical ``a+bi`` literal for a complex number (no parentheses)."""
    c = complex(c)
    re_part = _fmt_float(c.real)
    im = c.imag
    if im == 0:
        return f"{re_part}+0.0i"
    sign = "-" if math.copysign(1.0, im) < 0 else "+"
    return f"{re_part}{sign}{_fmt_float(abs(im))}i"


def _format_monomial(m):
    parts = []
    for j, e in enumerate(m):
        if e == 1:
            parts.append(f"z{j + 1}")
        elif e > 1:
            parts.append(f"z{j + 1}^{e}")
    return "*".join(parts)


def format_series(f):
    """Canonical text form; ``parse_series(format_series(f))`` reproduces ``f``."""
    terms = []
    exps = f.basis.exponents
    for k in np.nonzero(f.coeffs)[0]:
        coef = f"({format_number(f.coeffs[k])})"
        mono = _format_monomial(exps[k])
        terms.append(f"{coef}*{mono}" if mono else coef)
    return " + ".join(terms) if terms else "0"


def format_germ(g):
    return [format_series(c) for c in g.components]


def format_monomial_term(i, m):
    """Human label ``e2*z1^2`` for component ``i`` (0-based) and exponent ``m``."""
    mono = _format_monomial(m)
    return f"e{i + 1}*{mono}" if mono else f"e{i + 1}"


__all__ = [
    "format_germ",
    "format_monomial_term",
    "format_number",
    "format_series",
    "parse_constant",
    "parse_germ",
    "parse_series",
]
