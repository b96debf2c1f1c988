"""Recursive-descent parser for the formula language.

Precedence from loosest to tightest: ``->`` (right associative), ``|``, ``&``,
``!``. A quantifier body extends as far to the right as possible. Parentheses
and square brackets both group formulas; a parenthesis that opens a term
(``(F(c + h) - F(c)) / h = d``) is recognised by trying the atom reading first.
"""

from __future__ import annotations

import re

from ..errors import InputSyntaxError
from .syntax import (
    COMPARISONS,
    INFINITESIMAL,
    KINDS,
    SORTS,
    And,
    App,
    Arith,
    Compare,
    Formula,
    Implies,
    Mag,
    Member,
    Minus,
    Not,
    Num,
    Or,
    Pred,
    Quant,
    SetLit,
    St,
    Term,
    Truth,
    Var,
    atom_terms,
    children,
    term_vars,
)

_TOKEN = re.compile(
    r"\s*(?:(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9']*)|(?P<sym>->|!=|<=|>=|[()\[\]{},.:+\-*/=<>&|!]))"
)


class _Tokens:
    def __init__(self, text: str):
        self.text = text
        self.items: list[tuple[str, str, int]] = []
        pos = 0
        end = len(text.rstrip())
        while pos < end:
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                bad = pos + len(text[pos:]) - len(text[pos:].lstrip())
                raise InputSyntaxError(f"unexpected character {text[bad]!r}", bad, text)
            kind = m.lastgroup
            self.items.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.items.append(("end", "", end))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _Tokens(text).items
        self.i = 0

    # token helpers
    def peek(self, k: int = 0):
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, value: str, k: int = 0) -> bool:
        kind, val, _ = self.peek(k)
        return kind in ("sym", "name") and val == value

    def accept(self, value: str) -> bool:
        if self.at(value):
            self.i += 1
            return True
        return False

    def expect(self, value: str):
        if not self.accept(value):
            self.fail(f"expected {value!r}")

    def fail(self, msg: str):
        kind, val, pos = self.peek()
        found = "end of input" if kind == "end" else repr(val)
        raise InputSyntaxError(f"{msg}, found {found}", pos, self.text)

    def name(self) -> str:
        kind, val, _ = self.peek()
        if kind != "name":
            self.fail("expected an identifier")
        self.i += 1
        return val

    # formulas
    def parse(self) -> Formula:
        if self.peek()[0] == "end":
            self.fail("empty formula")
        f = self.implication()
        if self.peek()[0] != "end":
            self.fail("unexpected trailing input")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.accept("->"):
            return Implies(left, self.implication())
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.accept("|"):
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.unary()
        while self.accept("&"):
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        if self.accept("!"):
            return Not(self.unary())
        kind, val, _ = self.peek()
        if kind == "name" and val in KINDS and self.peek(1)[0] == "name":
            return self.quantifier()
        return self.primary()

    def quantifier(self) -> Formula:
        kind = self.name()
        var = self.name()
        sort = "real"
        if self.accept(":"):
            pos = self.peek()[2]
            sort = self.name()
            if sort not in SORTS:
                raise InputSyntaxError(f"unknown sort {sort!r}", pos, self.text)
        bound = None
        if self.accept("<="):
            bound = self.term()
        self.expect(".")
        return Quant(kind, var, self.implication(), sort, bound)

    def primary(self) -> Formula:
        if self.at("("):
            saved = self.i
            try:
                atom = self.atom(require_relation=True)
            except InputSyntaxError:
                atom = None
            if atom is not None:
                return atom
            self.i = saved
            self.expect("(")
            f = self.implication()
            self.expect(")")
            return f
        if self.accept("["):
            f = self.implication()
            self.expect("]")
            return f
        return self.atom()

    def atom(self, require_relation: bool = False) -> Formula | None:
        if self.at("true") and not self.at("(", 1):
            self.i += 1
            return Truth(True)
        if self.at("false") and not self.at("(", 1):
            self.i += 1
            return Truth(False)
        start = self.peek()[2]
        if self.at("st") and self.at("(", 1):
            self.i += 2
            t = self.term()
            self.expect(")")
            return St(t)
        left = self.term()
        kind, val, pos = self.peek()
        if kind == "sym" and val in COMPARISONS:
            self.i += 1
            right = self.term()
            if isinstance(left, App) and left.fn == "mag":
                return self._mag(left, val, right, start)
            return Compare(val, left, right)
        if kind == "name" and val == "in":
            self.i += 1
            return Member(left, self.term())
        if require_relation:
            return None
        if isinstance(left, App):
            return Pred(left.fn, left.args)
        if isinstance(left, Var):
            return Pred(left.name, ())
        raise InputSyntaxError("expected a formula", start, self.text)

    def _mag(self, left: App, op: str, right: Term, pos: int) -> Formula:
        ok = (
            op == "<"
            and len(left.args) == 1
            and isinstance(right, Arith)
            and right.op == "/"
            and right.left == Num(1)
            and isinstance(right.right, (Var, Num))
        )
        if not ok:
            raise InputSyntaxError("magnitude atoms have the form mag(t) < 1/v", pos, self.text)
        if isinstance(right.right, Num) and right.right.value == 0:
            raise InputSyntaxError("magnitude denominator must be positive", pos, self.text)
        return Mag(left.args[0], right.right)

    # terms
    def term(self) -> Term:
        t = self.product()
        while self.peek()[0] == "sym" and self.peek()[1] in "+-" and self.peek()[1] != "->":
            op = self.peek()[1]
            self.i += 1
            t = Arith(op, t, self.product())
        return t

    def product(self) -> Term:
        t = self.negation()
        while self.peek()[0] == "sym" and self.peek()[1] in ("*", "/"):
            op = self.peek()[1]
            self.i += 1
            t = Arith(op, t, self.negation())
        return t

    def negation(self) -> Term:
        if self.at("-"):
            self.i += 1
            return Minus(self.negation())
        return self.base()

    def base(self) -> Term:
        kind, val, _ = self.peek()
        if kind == "int":
            self.i += 1
            return Num(int(val))
        if kind == "name":
            if val in ("in",):
                self.fail("expected a term")
            self.i += 1
            if self.accept("("):
                args = self.arguments(")")
                return App(val, args)
            return Var(val)
        if self.accept("("):
            t = self.term()
            self.expect(")")
            return t
        if self.accept("{"):
            return SetLit(self.arguments("}"))
        self.fail("expected a term")

    def arguments(self, closer: str) -> tuple:
        args = []
        if self.accept(closer):
            return ()
        while True:
            args.append(self.term())
            if self.accept(closer):
                return tuple(args)
            self.expect(",")


def parse_formula(text: str) -> Formula:
    """Parse and sort-check a formula."""
    f = _Parser(text).parse()
    check_formula(f, text)
    return f


def check_formula(f: Formula, text: str | None = None) -> None:
    """Static checks: binder sorts, magnitude denominators, no shadowing or capture."""
    free: set[str] = set()
    bound_names: set[str] = set()

    def err(msg):
        raise InputSyntaxError(msg, None, text)

    def visit(node, scope: dict[str, str]):
        if isinstance(node, Quant):
            if node.kind in INFINITESIMAL and node.sort != "real":
                err(f"{node.kind} {node.var} must bind a real-sorted variable")
            if node.bound is not None:
                if node.sort != "posint" or node.kind not in ("A", "E"):
                    err(f"bounded quantifier {node.var} must be a plain posint quantifier")
                for v in term_vars(node.bound):
                    if v not in scope:
                        free.add(v)
            if node.var in scope:
                err(f"variable {node.var!r} is bound twice on one branch")
            bound_names.add(node.var)
            visit(node.body, {**scope, node.var: node.sort})
            return
        if isinstance(node, Mag) and isinstance(node.denom, Var):
            sort = scope.get(node.denom.name)
            if sort is not None and sort != "posint":
                err(f"magnitude denominator {node.denom.name!r} is bound with sort {sort}")
        if not children(node):
            for t in atom_terms(node):
                for v in term_vars(t):
                    if v not in scope:
                        free.add(v)
        for c in children(node):
            visit(c, scope)

    visit(f, {})
    clash = free & bound_names
    if clash:
        err(f"variables {sorted(clash)} occur both free and bound")
