"""Polynomial expression language for CLI inputs.

Grammar (whitespace-insensitive)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom ('^' INT)?
    atom   := INT ('/' INT)? | 'i' | 'h' | 'z' INT | 'zb' INT | '(' expr ')'

``h`` is hbar, ``i`` the imaginary unit, ``z1..zn`` / ``zb1..zbn`` the
coordinates and their conjugates.  The result is a fiber-constant 0-form
(a polynomial in z, zbar and hbar).
"""
from __future__ import annotations

import re

from ..scalar import Scalar
from ..weyl import INF, WeylForm


class ExpressionError(ValueError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} at offset {offset}")
        self.offset = offset


_TOKEN = re.compile(r"\s*(?:(\d+)|(zb|z)(\d+)|([ih])|([-+*^/()]))")


def _tokenize(text: str):
    toks = []
    pos = 0
    data = text.encode()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            if text[pos:].strip() == "":
                break
            off = len(text[:pos].encode()) + (len(text[pos:]) - len(text[pos:].lstrip()))
            raise ExpressionError(f"unexpected character {text[pos:].lstrip()[0]!r}", off)
        start = len(text[: m.end() - len(m.group(0).lstrip())].encode())
        if m.group(1):
            toks.append(("int", int(m.group(1)), start))
        elif m.group(2):
            toks.append((m.group(2), int(m.group(3)), start))
        elif m.group(4):
            toks.append((m.group(4), None, start))
        else:
            toks.append((m.group(5), None, start))
        pos = m.end()
    toks.append(("end", None, len(data)))
    return toks


class _Parser:
    def __init__(self, text: str, n: int):
        self.toks = _tokenize(text)
        self.i = 0
        self.n = n

    def peek(self):
        return self.toks[self.i]

    def take(self, kind=None):
        tok = self.toks[self.i]
        if kind is not None and tok[0] != kind:
            what = "end of input" if tok[0] == "end" else repr(tok[0])
            raise ExpressionError(f"expected {kind!r}, found {what}", tok[2])
        self.i += 1
        return tok

    def expr(self) -> WeylForm:
        out = self.term()
        while self.peek()[0] in ("+", "-"):
            op = self.take()[0]
            rhs = self.term()
            out = out + rhs if op == "+" else out - rhs
        return out

    def term(self) -> WeylForm:
        out = self.unary()
        while self.peek()[0] == "*":
            self.take()
            out = out * self.unary()
        return out

    def unary(self) -> WeylForm:
        kind = self.peek()[0]
        if kind == "-":
            self.take()
            return -self.unary()
        if kind == "+":
            self.take()
            return self.unary()
        return self.power()

    def power(self) -> WeylForm:
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            k = self.take("int")[1]
            return base ** k
        return base

    def atom(self) -> WeylForm:
        kind, val, off = self.peek()
        n = self.n
        if kind == "int":
            self.take()
            num = val
            if self.peek()[0] == "/":
                self.take()
                den_tok = self.take("int")
                if den_tok[1] == 0:
                    raise ExpressionError("division by zero", den_tok[2])
                return WeylForm.const(n, Scalar(num) / den_tok[1])
            return WeylForm.const(n, num)
        if kind == "i":
            self.take()
            return WeylForm.const(n, Scalar(0, 1))
        if kind == "h":
            self.take()
            return WeylForm.var(n, "hbar")
        if kind in ("z", "zb"):
            self.take()
            if not 1 <= val <= n:
                raise ExpressionError(f"unknown variable {kind}{val} (dimension {n})", off)
            return WeylForm.var(n, kind, val - 1)
        if kind == "(":
            self.take()
            out = self.expr()
            self.take(")")
            return out
        what = "end of input" if kind == "end" else repr(kind)
        raise ExpressionError(f"unexpected {what}", off)


def parse_expression(text: str, n: int = 1) -> WeylForm:
    p = _Parser(text, n)
    out = p.expr()
    p.take("end")
    return out


# canonical printer -----------------------------------------------------------

def _rat(q) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _coeff(c: Scalar):
    """Return (sign, text) with text '' meaning a unit coefficient."""
    if c.im == 0:
        sign = -1 if c.re < 0 else 1
        a = abs(c.re)
        return sign, "" if a == 1 else _rat(a)
    if c.re == 0:
        sign = -1 if c.im < 0 else 1
        a = abs(c.im)
        return sign, "i" if a == 1 else f"{_rat(a)}*i"
    im = c.im
    body = f"{_rat(c.re)} {'-' if im < 0 else '+'} {'' if abs(im) == 1 else _rat(abs(im)) + '*'}i"
    return 1, f"({body})"


def format_expression(a: WeylForm) -> str:
    """Canonical text for a fiber-constant 0-form; parses back to ``a``."""
    n = a.n
    if any(k[2] or any(k[1][: 2 * n]) for k in a.terms):
        raise ValueError("only fiber-constant 0-forms have an expression form")
    if any(k[0] % 2 for k in a.terms):
        raise ValueError("half-integer hbar powers have no expression form")
    names = [f"z{i + 1}" for i in range(n)] + [f"zb{i + 1}" for i in range(n)]

    def order(item):
        (h, e, _), _c = item
        return (h, sum(e), tuple(-x for x in e[2 * n:]))

    parts = []
    for (h, e, _), c in sorted(a.terms.items(), key=order):
        mono = []
        if h:
            mono.append("h" if h == 2 else f"h^{h // 2}")
        for nm, p in zip(names, e[2 * n:]):
            if p:
                mono.append(nm if p == 1 else f"{nm}^{p}")
        sign, txt = _coeff(c)
        if txt and mono:
            body = "*".join([txt] + mono)
        elif txt:
            body = txt
        elif mono:
            body = "*".join(mono)
        else:
            body = "1"
        if not parts:
            parts.append(("-" if sign < 0 else "") + body)
        else:
            parts.append(("- " if sign < 0 else "+ ") + body)
    return " ".join(parts) if parts else "0"


def truncate_hbar(a: WeylForm, hbar_order: int) -> WeylForm:
    return a.filter(lambda k: k[0] <= 2 * hbar_order)


def exact(a: WeylForm) -> WeylForm:
    return a.with_cap(INF)
