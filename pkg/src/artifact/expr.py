"""Arithmetic expression trees evaluated exactly over the Levi-Civita field.

Grammar (whitespace-insensitive)::

    expr    := term (('+' | '-') term)*
    term    := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' ['-'] INT)?
    atom    := INT ['/' INT] | NAME | FUNC '(' expr ')' | '(' expr ')'
    FUNC    := exp | sin | cos

``p/q`` written with two integer literals is a single rational constant.
``exp``, ``sin`` and ``cos`` denote their Maclaurin polynomials of a fixed
degree (``series_degree``), so every expression is a rational function of
its variables and evaluates exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .errors import DivisionByZero, InputSyntaxError, NonPolynomial, UnboundVariable
from .hyper import LCNum, from_rational, int_pow, truncate

SERIES_DEGREE = 8
FUNCTIONS = ("exp", "sin", "cos")


@dataclass(frozen=True)
class Const:
    value: Fraction


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * /
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Neg:
    arg: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Func:
    name: str
    arg: "Expr"


Expr = Union[Const, Var, BinOp, Neg, Pow, Func]


def const(value) -> Const:
    return Const(Fraction(value))


def free_variables(e: Expr) -> set[str]:
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Const):
        return set()
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    if isinstance(e, (Neg, Func)):
        return free_variables(e.arg)
    if isinstance(e, Pow):
        return free_variables(e.base)
    raise TypeError(e)


# series coefficients ---------------------------------------------------------

def maclaurin(name: str, degree: int = SERIES_DEGREE) -> list[Fraction]:
    """Coefficients c_0..c_degree of the Maclaurin polynomial of ``name``."""
    coeffs = []
    for n in range(degree + 1):
        f = Fraction(1, math.factorial(n))
        if name == "exp":
            coeffs.append(f)
        elif name == "sin":
            coeffs.append(0 if n % 2 == 0 else f * (-1) ** ((n - 1) // 2))
        elif name == "cos":
            coeffs.append(f * (-1) ** (n // 2) if n % 2 == 0 else Fraction(0))
        else:
            raise ValueError(f"unknown function {name!r}")
    return coeffs


# evaluation ------------------------------------------------------------------

def eval_expr(e: Expr, env: Mapping[str, object], series_degree: int = SERIES_DEGREE) -> LCNum:
    """Evaluate ``e`` in the field; environment values may be LCNum, int or Fraction."""
    if isinstance(e, Const):
        return from_rational(e.value)
    if isinstance(e, Var):
        if e.name not in env:
            raise UnboundVariable(f"variable {e.name!r} is not bound")
        return LCNum.coerce(env[e.name])
    if isinstance(e, Neg):
        return -eval_expr(e.arg, env, series_degree)
    if isinstance(e, BinOp):
        a = eval_expr(e.left, env, series_degree)
        b = eval_expr(e.right, env, series_degree)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b.is_exact_zero():
            raise DivisionByZero("division by zero while evaluating expression")
        return a / b
    if isinstance(e, Pow):
        base = eval_expr(e.base, env, series_degree)
        if e.exponent < 0 and base.is_exact_zero():
            raise DivisionByZero("negative power of zero")
        return int_pow(base, e.exponent)
    if isinstance(e, Func):
        x = eval_expr(e.arg, env, series_degree)
        total = from_rational(0)
        power = from_rational(1)
        for c in maclaurin(e.name, series_degree):
            if c:
                total = total + power * from_rational(c)
            power = power * x
        # for an infinitesimal argument the omitted tail starts at (degree+1)*valuation
        v = x.valuation()
        if v is not None and x.terms and v > 0:
            total = truncate(total, (series_degree + 1) * v)
        return total
    raise TypeError(e)


def eval_rational(e: Expr, env: Mapping[str, Fraction], series_degree: int = SERIES_DEGREE) -> Fraction:
    """Fast path for evaluation at standard rational points."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        try:
            return Fraction(env[e.name])
        except KeyError:
            raise UnboundVariable(f"variable {e.name!r} is not bound") from None
    if isinstance(e, Neg):
        return -eval_rational(e.arg, env, series_degree)
    if isinstance(e, BinOp):
        a = eval_rational(e.left, env, series_degree)
        b = eval_rational(e.right, env, series_degree)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise DivisionByZero("division by zero while evaluating expression")
        return a / b
    if isinstance(e, Pow):
        base = eval_rational(e.base, env, series_degree)
        if base == 0 and e.exponent < 0:
            raise DivisionByZero("negative power of zero")
        return base ** e.exponent
    if isinstance(e, Func):
        x = eval_rational(e.arg, env, series_degree)
        total = Fraction(0)
        for c in reversed(maclaurin(e.name, series_degree)):
            total = total * x + c
        return total
    raise TypeError(e)


# polynomial view ---------------------------------------------------------------

Poly = dict  # degree -> Fraction


def _padd(a: Poly, b: Poly, sign: int = 1) -> Poly:
    out = dict(a)
    for d, c in b.items():
        out[d] = out.get(d, Fraction(0)) + sign * c
    return {d: c for d, c in out.items() if c}


def _pmul(a: Poly, b: Poly) -> Poly:
    out: Poly = {}
    for da, ca in a.items():
        for db, cb in b.items():
            out[da + db] = out.get(da + db, Fraction(0)) + ca * cb
    return {d: c for d, c in out.items() if c}


def to_polynomial(e: Expr, var: str) -> Poly:
    """Coefficient map of ``e`` as a polynomial in ``var``; raises NonPolynomial otherwise."""
    if isinstance(e, Const):
        return {0: e.value} if e.value else {}
    if isinstance(e, Var):
        if e.name != var:
            raise NonPolynomial(f"unexpected free variable {e.name!r}")
        return {1: Fraction(1)}
    if isinstance(e, Neg):
        return {d: -c for d, c in to_polynomial(e.arg, var).items()}
    if isinstance(e, BinOp):
        a = to_polynomial(e.left, var)
        b = to_polynomial(e.right, var)
        if e.op == "+":
            return _padd(a, b)
        if e.op == "-":
            return _padd(a, b, -1)
        if e.op == "*":
            return _pmul(a, b)
        if set(b) - {0}:
            raise NonPolynomial("division by a non-constant")
        if not b:
            raise DivisionByZero("division by zero polynomial")
        return {d: c / b[0] for d, c in a.items()}
    if isinstance(e, Pow):
        if e.exponent < 0:
            raise NonPolynomial("negative power")
        base = to_polynomial(e.base, var)
        out: Poly = {0: Fraction(1)}
        for _ in range(e.exponent):
            out = _pmul(out, base)
        return out
    if isinstance(e, Func):
        raise NonPolynomial(f"{e.name} is not polynomial")
    raise TypeError(e)


def from_polynomial(poly: Mapping[int, Fraction], var: str = "x") -> Expr:
    """Build an expression tree from a coefficient map (used by tests and the CLI)."""
    result: Expr | None = None
    for d in sorted(poly):
        c = Fraction(poly[d])
        if not c:
            continue
        if d == 0:
            term: Expr = Const(c)
        else:
            mono: Expr = Var(var) if d == 1 else Pow(Var(var), d)
            term = mono if c == 1 else BinOp("*", Const(c), mono)
        result = term if result is None else BinOp("+", result, term)
    return result if result is not None else Const(Fraction(0))


# parsing -----------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(\S))")


def _tokens(text: str) -> list[tuple[str, str, int]]:
    out = []
    pos = 0
    stripped = text.rstrip()
    while pos < len(stripped):
        m = _TOKEN.match(stripped, pos)
        idx = m.lastindex
        kind = ("int", "name", "sym")[idx - 1]
        val = m.group(idx)
        if kind == "sym" and val not in "+-*/^()":
            raise InputSyntaxError(f"unexpected character {val!r}", m.start(idx), text)
        out.append((kind, val, m.start(idx)))
        pos = m.end()
    out.append(("end", "", len(stripped)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokens(text)
        self.i = 0

    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def fail(self, msg: str):
        raise InputSyntaxError(msg, self.peek()[2], self.text)

    def sym(self, s: str) -> bool:
        if self.peek()[0] == "sym" and self.peek()[1] == s:
            self.i += 1
            return True
        return False

    def parse(self) -> Expr:
        if self.peek()[0] == "end":
            self.fail("empty expression")
        e = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek()[0] == "sym" and self.peek()[1] in "+-":
            op = self.take()[1]
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.unary()
        while self.peek()[0] == "sym" and self.peek()[1] in "*/":
            op = self.take()[1]
            e = BinOp(op, e, self.unary())
        return e

    def unary(self) -> Expr:
        if self.sym("-"):
            inner = self.unary()
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.sym("^"):
            negative = self.sym("-")
            kind, val, pos = self.take()
            if kind != "int":
                raise InputSyntaxError("exponent must be an integer literal", pos, self.text)
            return Pow(base, -int(val) if negative else int(val))
        return base

    def atom(self) -> Expr:
        kind, val, pos = self.peek()
        if kind == "int":
            self.take()
            value = Fraction(int(val))
            if self.peek()[1] == "/" and self.peek(1)[0] == "int":
                self.take()
                den = int(self.take()[1])
                if den == 0:
                    raise InputSyntaxError("zero denominator", pos, self.text)
                value /= den
            return Const(value)
        if kind == "name":
            self.take()
            if val in FUNCTIONS and self.peek()[1] == "(":
                self.take()
                arg = self.expr()
                if not self.sym(")"):
                    self.fail("expected ')'")
                return Func(val, arg)
            return Var(val)
        if self.sym("("):
            e = self.expr()
            if not self.sym(")"):
                self.fail("expected ')'")
            return e
        self.fail(f"unexpected {val or 'end of input'!r}")


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


# printing ------------------------------------------------------------------------

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def _fmt_const(c: Fraction) -> str:
    return str(c)


def format_expr(e: Expr) -> str:
    return _fmt(e, 0)


def _fmt(e: Expr, ctx: int) -> str:
    # ctx: binding strength required by the surrounding position
    if isinstance(e, Const):
        s = _fmt_const(e.value)
        needs = e.value < 0 or e.value.denominator != 1
        return f"({s})" if needs and ctx > 0 else s
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg, 0)})"
    if isinstance(e, Pow):
        return f"{_fmt(e.base, 4)}^{e.exponent}"
    if isinstance(e, Neg):
        s = "-" + _fmt(e.arg, 3)
        return f"({s})" if ctx > 1 else s
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = _fmt(e.left, p)
        right = _fmt(e.right, p + 1)
        s = f"{left} {e.op} {right}"
        return f"({s})" if p < ctx else s
    raise TypeError(e)
