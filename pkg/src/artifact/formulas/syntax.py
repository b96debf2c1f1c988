"""Abstract syntax for st-in-formulas and their textual form.

Terms::

    Var(name) | Num(int) | App(fn, args) | Arith(op, left, right) | Minus(arg) | SetLit(elements)

Formulas::

    Compare(op, left, right)        t1 = t2, t1 != t2, t1 < t2, ...
    Member(left, right)             t1 in t2
    Mag(term, denom)                mag(t) < 1/v
    Pred(name, args)                R(t1, ..., tk) or a bare name
    St(term)                        st(t)
    Truth(value)                    true / false
    Not, And, Or, Implies
    Quant(kind, var, sort, body, bound)

Quantifier kinds are ``A``/``E`` (plain), ``Ast``/``Est`` (standard) and
``Ain``/``Ein`` (over infinitesimals and 0). ``bound`` marks the bounded form
``A l:posint <= n. body`` where ``l`` ranges over 1..n.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

PLAIN = ("A", "E")
STANDARD = ("Ast", "Est")
INFINITESIMAL = ("Ain", "Ein")
KINDS = PLAIN + STANDARD + INFINITESIMAL
UNIVERSAL = ("A", "Ast", "Ain")
SORTS = ("real", "posint", "set")
COMPARISONS = ("=", "!=", "<", "<=", ">", ">=")


# terms -------------------------------------------------------------------------

@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Num:
    value: int


@dataclass(frozen=True)
class App:
    fn: str
    args: tuple


@dataclass(frozen=True)
class Arith:
    op: str
    left: "Term"
    right: "Term"


@dataclass(frozen=True)
class Minus:
    arg: "Term"


@dataclass(frozen=True)
class SetLit:
    elements: tuple


Term = Union[Var, Num, App, Arith, Minus, SetLit]


# formulas ----------------------------------------------------------------------

@dataclass(frozen=True)
class Compare:
    op: str
    left: Term
    right: Term


@dataclass(frozen=True)
class Member:
    left: Term
    right: Term


@dataclass(frozen=True)
class Mag:
    term: Term
    denom: Term  # Var or Num


@dataclass(frozen=True)
class Pred:
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class St:
    term: Term


@dataclass(frozen=True)
class Truth:
    value: bool


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Or:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Implies:
    left: "Formula"
    right: "Formula"


@dataclass(frozen=True)
class Quant:
    kind: str
    var: str
    body: "Formula"
    sort: str = "real"
    bound: Term | None = None

    @property
    def universal(self) -> bool:
        return self.kind in UNIVERSAL


Atom = Union[Compare, Member, Mag, Pred, St, Truth]
Formula = Union[Atom, Not, And, Or, Implies, Quant]
BINARY = (And, Or, Implies)
ATOMS = (Compare, Member, Mag, Pred, St, Truth)


# traversal ---------------------------------------------------------------------

def term_vars(t: Term) -> set[str]:
    if isinstance(t, Var):
        return {t.name}
    if isinstance(t, Num):
        return set()
    if isinstance(t, App):
        return set().union(*(term_vars(a) for a in t.args)) if t.args else set()
    if isinstance(t, Arith):
        return term_vars(t.left) | term_vars(t.right)
    if isinstance(t, Minus):
        return term_vars(t.arg)
    if isinstance(t, SetLit):
        return set().union(*(term_vars(a) for a in t.elements)) if t.elements else set()
    raise TypeError(t)


def atom_terms(f: Atom) -> tuple:
    if isinstance(f, (Compare, Member)):
        return (f.left, f.right)
    if isinstance(f, Mag):
        return (f.term, f.denom)
    if isinstance(f, Pred):
        return f.args
    if isinstance(f, St):
        return (f.term,)
    return ()


def free_vars(f: Formula) -> set[str]:
    if isinstance(f, ATOMS):
        out: set[str] = set()
        for t in atom_terms(f):
            out |= term_vars(t)
        return out
    if isinstance(f, Not):
        return free_vars(f.arg)
    if isinstance(f, BINARY):
        return free_vars(f.left) | free_vars(f.right)
    if isinstance(f, Quant):
        inner = free_vars(f.body) - {f.var}
        if f.bound is not None:
            inner |= term_vars(f.bound)
        return inner
    raise TypeError(f)


def all_names(f: Formula) -> set[str]:
    """Every identifier in the formula: variables, bound names, symbols."""
    names: set[str] = set()

    def term(t):
        if isinstance(t, Var):
            names.add(t.name)
        elif isinstance(t, App):
            names.add(t.fn)
            for a in t.args:
                term(a)
        elif isinstance(t, Arith):
            term(t.left)
            term(t.right)
        elif isinstance(t, Minus):
            term(t.arg)
        elif isinstance(t, SetLit):
            for a in t.elements:
                term(a)

    for node in walk(f):
        if isinstance(node, Pred):
            names.add(node.name)
        if isinstance(node, ATOMS):
            for t in atom_terms(node):
                term(t)
        if isinstance(node, Quant):
            names.add(node.var)
            if node.bound is not None:
                term(node.bound)
    return names


def children(f: Formula) -> tuple:
    if isinstance(f, Not):
        return (f.arg,)
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, Quant):
        return (f.body,)
    return ()


def walk(f: Formula) -> Iterator[Formula]:
    yield f
    for c in children(f):
        yield from walk(c)


def subformula(f: Formula, path: tuple[int, ...]) -> Formula:
    for step in path:
        f = children(f)[step]
    return f


def replace_at(f: Formula, path: tuple[int, ...], new: Formula) -> Formula:
    if not path:
        return new
    head, rest = path[0], path[1:]
    if isinstance(f, Not):
        return Not(replace_at(f.arg, rest, new))
    if isinstance(f, BINARY):
        if head == 0:
            return type(f)(replace_at(f.left, rest, new), f.right)
        return type(f)(f.left, replace_at(f.right, rest, new))
    if isinstance(f, Quant):
        return Quant(f.kind, f.var, replace_at(f.body, rest, new), f.sort, f.bound)
    raise IndexError(f"path {path} leaves the formula")


def is_internal(f: Formula) -> bool:
    """No st predicate and no st or in quantifiers anywhere."""
    for node in walk(f):
        if isinstance(node, St):
            return False
        if isinstance(node, Quant) and node.kind not in PLAIN:
            return False
    return True


# substitution ------------------------------------------------------------------

def subst_term(t: Term, name: str, new: Term) -> Term:
    if isinstance(t, Var):
        return new if t.name == name else t
    if isinstance(t, Num):
        return t
    if isinstance(t, App):
        return App(t.fn, tuple(subst_term(a, name, new) for a in t.args))
    if isinstance(t, Arith):
        return Arith(t.op, subst_term(t.left, name, new), subst_term(t.right, name, new))
    if isinstance(t, Minus):
        return Minus(subst_term(t.arg, name, new))
    if isinstance(t, SetLit):
        return SetLit(tuple(subst_term(a, name, new) for a in t.elements))
    raise TypeError(t)


def substitute(f: Formula, name: str, new: Term) -> Formula:
    """Replace free occurrences of ``name``; refuses to capture variables of ``new``."""
    incoming = term_vars(new)
    if isinstance(f, Compare):
        return Compare(f.op, subst_term(f.left, name, new), subst_term(f.right, name, new))
    if isinstance(f, Member):
        return Member(subst_term(f.left, name, new), subst_term(f.right, name, new))
    if isinstance(f, Mag):
        return Mag(subst_term(f.term, name, new), subst_term(f.denom, name, new))
    if isinstance(f, Pred):
        return Pred(f.name, tuple(subst_term(a, name, new) for a in f.args))
    if isinstance(f, St):
        return St(subst_term(f.term, name, new))
    if isinstance(f, Truth):
        return f
    if isinstance(f, Not):
        return Not(substitute(f.arg, name, new))
    if isinstance(f, BINARY):
        return type(f)(substitute(f.left, name, new), substitute(f.right, name, new))
    if isinstance(f, Quant):
        bound = None if f.bound is None else subst_term(f.bound, name, new)
        if f.var == name:
            return Quant(f.kind, f.var, f.body, f.sort, bound)
        if f.var in incoming and name in free_vars(f.body):
            raise ValueError(f"substituting for {name!r} would capture {f.var!r}")
        return Quant(f.kind, f.var, substitute(f.body, name, new), f.sort, bound)
    raise TypeError(f)


def rename_bound(f: Quant, new_name: str) -> Quant:
    return Quant(f.kind, new_name, substitute(f.body, f.var, Var(new_name)), f.sort, f.bound)


# alpha equivalence ---------------------------------------------------------------

def alpha_equal(f1: Formula, f2: Formula) -> bool:
    """Structural equality up to consistent renaming of bound variables."""
    return _alpha(f1, f2, {}, {}, 0)


def _alpha_term(t1: Term, t2: Term, e1: dict, e2: dict) -> bool:
    if type(t1) is not type(t2):
        return False
    if isinstance(t1, Var):
        if t1.name in e1 or t2.name in e2:
            return e1.get(t1.name) == e2.get(t2.name) and t1.name in e1 and t2.name in e2
        return t1.name == t2.name
    if isinstance(t1, Num):
        return t1.value == t2.value
    if isinstance(t1, App):
        return t1.fn == t2.fn and len(t1.args) == len(t2.args) and all(
            _alpha_term(a, b, e1, e2) for a, b in zip(t1.args, t2.args)
        )
    if isinstance(t1, Arith):
        return t1.op == t2.op and _alpha_term(t1.left, t2.left, e1, e2) and _alpha_term(t1.right, t2.right, e1, e2)
    if isinstance(t1, Minus):
        return _alpha_term(t1.arg, t2.arg, e1, e2)
    if isinstance(t1, SetLit):
        return len(t1.elements) == len(t2.elements) and all(
            _alpha_term(a, b, e1, e2) for a, b in zip(t1.elements, t2.elements)
        )
    raise TypeError(t1)


def _alpha(f1, f2, e1, e2, depth) -> bool:
    if type(f1) is not type(f2):
        return False
    if isinstance(f1, ATOMS):
        if isinstance(f1, Compare) and f1.op != f2.op:
            return False
        if isinstance(f1, Pred) and f1.name != f2.name:
            return False
        if isinstance(f1, Truth):
            return f1.value == f2.value
        t1, t2 = atom_terms(f1), atom_terms(f2)
        return len(t1) == len(t2) and all(_alpha_term(a, b, e1, e2) for a, b in zip(t1, t2))
    if isinstance(f1, Quant):
        if (f1.kind, f1.sort) != (f2.kind, f2.sort) or (f1.bound is None) != (f2.bound is None):
            return False
        if f1.bound is not None and not _alpha_term(f1.bound, f2.bound, e1, e2):
            return False
        return _alpha(f1.body, f2.body, {**e1, f1.var: depth}, {**e2, f2.var: depth}, depth + 1)
    return all(_alpha(a, b, e1, e2, depth) for a, b in zip(children(f1), children(f2)))


# printing ----------------------------------------------------------------------

_TERM_PREC = {"+": 1, "-": 1, "*": 2, "/": 2}


def format_term(t: Term, ctx: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Num):
        return str(t.value)
    if isinstance(t, App):
        return f"{t.fn}({', '.join(format_term(a) for a in t.args)})"
    if isinstance(t, SetLit):
        return "{" + ", ".join(format_term(a) for a in t.elements) + "}"
    if isinstance(t, Minus):
        s = "-" + format_term(t.arg, 3)
        return f"({s})" if ctx > 2 else s
    if isinstance(t, Arith):
        p = _TERM_PREC[t.op]
        s = f"{format_term(t.left, p)} {t.op} {format_term(t.right, p + 1)}"
        return f"({s})" if p < ctx else s
    raise TypeError(t)


def _format_atom(f: Atom) -> str:
    if isinstance(f, Compare):
        return f"{format_term(f.left)} {f.op} {format_term(f.right)}"
    if isinstance(f, Member):
        return f"{format_term(f.left)} in {format_term(f.right)}"
    if isinstance(f, Mag):
        return f"mag({format_term(f.term)}) < 1/{format_term(f.denom, 3)}"
    if isinstance(f, Pred):
        if not f.args:
            return f.name
        return f"{f.name}({', '.join(format_term(a) for a in f.args)})"
    if isinstance(f, St):
        return f"st({format_term(f.term)})"
    if isinstance(f, Truth):
        return "true" if f.value else "false"
    raise TypeError(f)


_PREC = {Implies: 1, Or: 2, And: 3}
_SYMBOL = {Implies: "->", Or: "|", And: "&"}


def format_formula(f: Formula) -> str:
    return _fmt(f, 0, True)


def format_binder(q: Quant) -> str:
    head = f"{q.kind} {q.var}"
    if q.sort != "real":
        head += f":{q.sort}"
    if q.bound is not None:
        head += f" <= {format_term(q.bound)}"
    return head


def _fmt(f: Formula, ctx: int, tail: bool) -> str:
    """``ctx`` is the precedence required here; ``tail`` says nothing follows on the right."""
    if isinstance(f, ATOMS):
        return _format_atom(f)
    if isinstance(f, Not):
        inner = _fmt(f.arg, 4, tail)
        return "!" + inner
    if isinstance(f, Quant):
        body = _fmt(f.body, 0, True)
        if isinstance(f.body, BINARY):
            body = f"({body})"
        s = f"{format_binder(f)}. {body}"
        return s if tail else f"({s})"
    if isinstance(f, BINARY):
        p = _PREC[type(f)]
        wrap = p < ctx
        inner_tail = True if wrap else tail
        if isinstance(f, Implies):
            left = _fmt(f.left, p + 1, False)
            right = _fmt(f.right, p, inner_tail)
        else:
            left = _fmt(f.left, p, False)
            right = _fmt(f.right, p + 1, inner_tail)
        s = f"{left} {_SYMBOL[type(f)]} {right}"
        return f"({s})" if wrap else s
    raise TypeError(f)
