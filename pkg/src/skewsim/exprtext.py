"""Tiny arithmetic-expression parser for custom drift files.

Grammar: literals, x, + - * / ^, parentheses, sin, cos, sqrt, exp, log,
piecewise(cond ? e1 : e2) with cond of the form x >= c.  Parsing yields a
plain Python callable of one float.
"""

from __future__ import annotations

import math
import re

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>>=|[-+*/^()?:,]))"
)

_FUNCS = {
    "sin": math.sin,
    "cos": math.cos,
    "sqrt": math.sqrt,
    "exp": math.exp,
    "log": math.log,
}

_CONSTS = {"pi": math.pi, "e": math.e}


class ExpressionError(ValueError):
    pass


def _tokenize(text: str):
    pos = 0
    out = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"bad character at {text[pos:pos + 10]!r}")
        if m.group("num") is not None:
            out.append(("num", float(m.group("num"))))
        elif m.group("name") is not None:
            out.append(("name", m.group("name")))
        else:
            out.append(("op", m.group("op")))
        pos = m.end()
    out.append(("end", None))
    return out


class _Parser:
    def __init__(self, tokens):
        self.toks = tokens
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, op):
        kind, val = self.next()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}, got {val!r}")

    def parse(self):
        node = self.expr()
        if self.peek()[0] != "end":
            raise ExpressionError(f"trailing input at {self.peek()!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            op = self.next()[1]
            rhs = self.term()
            node = (lambda f, g: (lambda x: f(x) + g(x)))(node, rhs) if op == "+" else (
                lambda f, g: (lambda x: f(x) - g(x))
            )(node, rhs)
        return node

    def term(self):
        node = self.factor()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            op = self.next()[1]
            rhs = self.factor()
            node = (lambda f, g: (lambda x: f(x) * g(x)))(node, rhs) if op == "*" else (
                lambda f, g: (lambda x: f(x) / g(x))
            )(node, rhs)
        return node

    def factor(self):
        # unary minus binds below the power: -x^2 == -(x^2)
        if self.peek() == ("op", "-"):
            self.next()
            inner = self.factor()
            return (lambda f: (lambda x: -f(x)))(inner)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek() == ("op", "^"):
            self.next()
            expo = self.factor()  # right-associative; exponent may be signed
            return (lambda f, g: (lambda x: f(x) ** g(x)))(base, expo)
        return base

    def atom(self):
        kind, val = self.next()
        if kind == "num":
            return (lambda c: (lambda x: c))(val)
        if kind == "name":
            if val == "x":
                return lambda x: x
            if val in _CONSTS:
                return (lambda c: (lambda x: c))(_CONSTS[val])
            if val == "piecewise":
                return self.piecewise()
            if val in _FUNCS:
                self.expect("(")
                inner = self.expr()
                self.expect(")")
                return (lambda fn, f: (lambda x: fn(f(x))))(_FUNCS[val], inner)
            raise ExpressionError(f"unknown name {val!r}")
        if (kind, val) == ("op", "("):
            inner = self.expr()
            self.expect(")")
            return inner
        raise ExpressionError(f"unexpected token {val!r}")

    def piecewise(self):
        self.expect("(")
        kind, val = self.next()
        if (kind, val) != ("name", "x"):
            raise ExpressionError("piecewise condition must start with x")
        self.expect(">=")
        sign = 1.0
        kind, val = self.next()
        if (kind, val) == ("op", "-"):
            sign = -1.0
            kind, val = self.next()
        if kind != "num":
            raise ExpressionError("piecewise threshold must be a literal")
        thr = sign * val
        self.expect("?")
        hi = self.expr()
        self.expect(":")
        lo = self.expr()
        self.expect(")")
        return (lambda c, f, g: (lambda x: f(x) if x >= c else g(x)))(thr, hi, lo)


def parse_expression(text: str):
    """Compile the expression text to a callable of one float."""
    return _Parser(_tokenize(text)).parse()
