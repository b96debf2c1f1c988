"""Rule-driven rewriting of infinitesimal quantifiers into Delta-st form.

Each rule is a function ``(node, params) -> node`` that raises
RuleNotApplicable when its side condition fails. The driver first expands
the in-quantifiers, then repeatedly applies the first rule that fires in a
post-order scan (right operands before left ones) until no rule applies.
Every step is recorded with the whole formula before and after, the path of
the rewritten node and the rule parameters, so a trace can be replayed.

Supported input shapes, with ``phi`` internal:

* a quantifier prefix whose in-quantifiers are all of one kind;
* a prefix made of a universal block followed by an existential block (or
  the reverse), where the universal block uses ``A``/``Ain`` and the
  existential block uses ``E``/``Ein``.

Other shapes are rejected with the first quantifier that breaks the pattern.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from typing import Callable

from ..errors import RuleNotApplicable, UnsupportedShape
from .classify import classify_delta_st, erase_marks
from .syntax import (
    BINARY,
    INFINITESIMAL,
    PLAIN,
    STANDARD,
    And,
    Formula,
    Implies,
    Mag,
    Not,
    Num,
    Or,
    Quant,
    Var,
    all_names,
    children,
    format_formula,
    free_vars,
    is_internal,
    replace_at,
    subformula,
    substitute,
    term_vars,
    walk,
)

EXPAND = "expand-infinitesimal-def"
IDEALIZE = "countable-idealization"
COLLAPSE = "bounded-quantifier-collapse"
COMMUTE = "st-quantifier-commute"
MERGE = "st-quantifier-merge"
EXCHANGE = "prefix-exchange"
TRANSFER = "transfer-collapse"

_DUAL = {"Ast": "Est", "Est": "Ast", "A": "E", "E": "A"}


# polarity of magnitude denominators ------------------------------------------------

def denominator_polarities(f: Formula, var: str) -> set[int] | None:
    """Polarities (+1/-1) of the free occurrences of ``var``.

    Returns None if ``var`` occurs anywhere other than as the denominator of
    a magnitude atom. An occurrence is positive when making ``var`` larger
    makes the whole formula stronger.
    """
    out: set[int] = set()

    def visit(node, sign) -> bool:
        if isinstance(node, Quant):
            if node.bound is not None and var in term_vars(node.bound):
                return False
            if node.var == var:
                return True
            return visit(node.body, sign)
        if isinstance(node, Mag):
            if var in term_vars(node.term):
                return False
            if node.denom == Var(var):
                out.add(sign)
            return True
        if isinstance(node, Not):
            return visit(node.arg, -sign)
        if isinstance(node, Implies):
            return visit(node.left, -sign) and visit(node.right, sign)
        if isinstance(node, BINARY):
            return visit(node.left, sign) and visit(node.right, sign)
        return var not in free_vars(node)

    return out if visit(f, 1) else None


def _only(f: Formula, var: str, sign: int) -> bool:
    pol = denominator_polarities(f, var)
    return pol is not None and pol <= {sign}


# rules ------------------------------------------------------------------------------

def _mag(var: str, denom: str) -> Mag:
    return Mag(Var(var), Var(denom))


def _conjoin(parts: list[Formula]) -> Formula:
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def rule_expand(node: Formula, params: dict) -> Formula:
    """Unfold "ranges over infinitesimals and 0" into st-quantified magnitude bounds."""
    if params.get("mode") == "same-kind":
        prefix, matrix = _prefix(node)
        in_vars = [q.var for q in prefix if q.kind in INFINITESIMAL]
        names = params["st_vars"]
        if not in_vars or len(names) != len(in_vars):
            raise RuleNotApplicable("expected one st variable per in-quantifier")
        kinds = {q.kind for q in prefix if q.kind in INFINITESIMAL}
        if len(kinds) != 1:
            raise RuleNotApplicable("in-quantifiers are of mixed kinds")
        bounds = _conjoin([_mag(v, n) for v, n in zip(in_vars, names)])
        if kinds == {"Ein"}:
            body, st_kind = And(bounds, matrix), "Ast"
        else:
            body, st_kind = Implies(bounds, matrix), "Est"
        for n in reversed(names):
            body = Quant(st_kind, n, body, "posint")
        for q in reversed(prefix):
            body = Quant(q.kind[0] if q.kind in INFINITESIMAL else q.kind, q.var, body, q.sort, q.bound)
        return body
    if not isinstance(node, Quant) or node.kind not in INFINITESIMAL:
        raise RuleNotApplicable("not an in-quantifier")
    n = params["st_var"]
    if n in all_names(node):
        raise RuleNotApplicable(f"st variable {n!r} is not fresh")
    bound = Quant("Ast", n, _mag(node.var, n), "posint")
    if node.kind == "Ain":
        return Quant("A", node.var, Implies(bound, node.body), node.sort)
    return Quant("E", node.var, And(bound, node.body), node.sort)


def rule_exchange(node: Formula, params: dict) -> Formula:
    """A x. Ast n. B  ->  Ast n. A x. B   and   E x. Est n. B  ->  Est n. E x. B."""
    if not (isinstance(node, Quant) and node.kind in PLAIN and node.bound is None):
        raise RuleNotApplicable("not a plain quantifier")
    inner = node.body
    if not (isinstance(inner, Quant) and inner.kind == node.kind + "st" and inner.bound is None):
        raise RuleNotApplicable("no same-kind st quantifier directly inside")
    return Quant(inner.kind, inner.var, Quant(node.kind, node.var, inner.body, node.sort), inner.sort)


def rule_idealize(node: Formula, params: dict) -> Formula:
    """E x. Ast n. B -> Ast n. E x. A l<=n. B[l/n]  (and the dual with A/Est/E)."""
    if not (isinstance(node, Quant) and node.kind in PLAIN and node.bound is None):
        raise RuleNotApplicable("not a plain quantifier")
    inner = node.body
    wanted = "Ast" if node.kind == "E" else "Est"
    if not (isinstance(inner, Quant) and inner.kind == wanted and inner.sort == "posint"):
        raise RuleNotApplicable(f"expected {wanted} over posint directly inside")
    if not is_internal(inner.body):
        raise RuleNotApplicable("matrix is not an internal formula")
    sign = 1 if wanted == "Ast" else -1
    if not _only(inner.body, inner.var, sign):
        raise RuleNotApplicable("st variable is not confined to magnitude bounds of the right polarity")
    l = params["bounded_var"]
    if l in all_names(node):
        raise RuleNotApplicable(f"bounded variable {l!r} is not fresh")
    bounded = Quant(_DUAL[node.kind], l, substitute(inner.body, inner.var, Var(l)), "posint", Var(inner.var))
    return Quant(inner.kind, inner.var, Quant(node.kind, node.var, bounded, node.sort), inner.sort)


def rule_collapse(node: Formula, params: dict) -> Formula:
    """A l<=n. B(l) -> B(n) when B strengthens with l; E l<=n. B(l) -> B(n) when B weakens."""
    if not (isinstance(node, Quant) and node.bound is not None and node.kind in PLAIN):
        raise RuleNotApplicable("not a bounded quantifier")
    if not isinstance(node.bound, (Var, Num)):
        raise RuleNotApplicable("bound must be a variable or numeral")
    sign = 1 if node.kind == "A" else -1
    if not _only(node.body, node.var, sign):
        raise RuleNotApplicable("bounded variable occurs with the wrong polarity")
    return substitute(node.body, node.var, node.bound)


def rule_commute(node: Formula, params: dict) -> Formula:
    """Pull an st quantifier out of a connective."""
    if isinstance(node, Not):
        q = node.arg
        if not (isinstance(q, Quant) and q.kind in STANDARD):
            raise RuleNotApplicable("negation of a non-st formula")
        return Quant(_DUAL[q.kind], q.var, Not(q.body), q.sort)
    if not isinstance(node, BINARY):
        raise RuleNotApplicable("not a connective")
    side = params["side"]
    q, other = (node.right, node.left) if side == "right" else (node.left, node.right)
    if not (isinstance(q, Quant) and q.kind in STANDARD and q.bound is None):
        raise RuleNotApplicable(f"{side} operand is not st-quantified")
    if q.var in free_vars(other):
        raise RuleNotApplicable(f"{q.var!r} is free in the other operand")
    kind = q.kind
    if isinstance(node, Implies) and side == "left":
        kind = _DUAL[kind]
    rebuilt = type(node)(other, q.body) if side == "right" else type(node)(q.body, other)
    return Quant(kind, q.var, rebuilt, q.sort)


def rule_merge(node: Formula, params: dict) -> Formula:
    """Ast u. Ast v. B -> Ast u. B[u/v] when both strengthen B (dually for Est)."""
    if not (isinstance(node, Quant) and node.kind in STANDARD):
        raise RuleNotApplicable("not an st quantifier")
    inner = node.body
    if not (isinstance(inner, Quant) and inner.kind == node.kind):
        raise RuleNotApplicable("no adjacent st quantifier of the same kind")
    if node.sort != "posint" or inner.sort != "posint":
        raise RuleNotApplicable("merging needs posint variables")
    sign = 1 if node.kind == "Ast" else -1
    body = inner.body
    if not (_only(body, node.var, sign) and _only(body, inner.var, sign)):
        raise RuleNotApplicable("variables are not uniformly monotone")
    return Quant(node.kind, node.var, substitute(body, inner.var, Var(node.var)), node.sort)


def rule_transfer(node: Formula, params: dict) -> Formula:
    if not classify_delta_st(node).delta_st:
        raise RuleNotApplicable("formula is not Delta-st")
    return erase_marks(node)


RULES: dict[str, Callable[[Formula, dict], Formula]] = {
    EXPAND: rule_expand,
    EXCHANGE: rule_exchange,
    IDEALIZE: rule_idealize,
    COLLAPSE: rule_collapse,
    COMMUTE: rule_commute,
    MERGE: rule_merge,
    TRANSFER: rule_transfer,
}


# traces ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class TraceStep:
    rule: str
    before: Formula
    after: Formula
    path: tuple[int, ...]
    params: dict = field(default_factory=dict, hash=False, compare=True)

    def record(self) -> dict:
        return {
            "rule": self.rule,
            "path": list(self.path),
            "params": self.params,
            "before": format_formula(self.before),
            "after": format_formula(self.after),
        }


@dataclass
class RewriteTrace:
    steps: list[TraceStep] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def append(self, rule: str, before: Formula, path: tuple, params: dict) -> Formula:
        node = subformula(before, path)
        after = replace_at(before, path, RULES[rule](node, params))
        self.steps.append(TraceStep(rule, before, after, tuple(path), dict(params)))
        return after

    def rules(self) -> list[str]:
        return [s.rule for s in self.steps]

    def records(self) -> list[dict]:
        return [s.record() for s in self.steps]

    def to_json(self) -> str:
        return json.dumps(self.records(), indent=2)

    def to_text(self) -> str:
        lines = []
        for i, s in enumerate(self.steps, 1):
            where = ".".join(map(str, s.path)) or "root"
            lines.append(f"{i:>2}. {s.rule} at {where}")
            lines.append(f"    {format_formula(s.after)}")
        return "\n".join(lines)


def replay(trace: RewriteTrace) -> bool:
    """Re-run every recorded step and check that the steps chain together."""
    previous = None
    for s in trace.steps:
        if previous is not None and s.before != previous:
            return False
        try:
            node = subformula(s.before, s.path)
            redone = replace_at(s.before, s.path, RULES[s.rule](node, s.params))
        except (RuleNotApplicable, IndexError, KeyError):
            return False
        if redone != s.after:
            return False
        previous = s.after
    return True


# driver ----------------------------------------------------------------------------------

def _prefix(f: Formula) -> tuple[list[Quant], Formula]:
    """Leading quantifiers up to the last in-quantifier, and what follows."""
    prefix = []
    node = f
    while isinstance(node, Quant):
        prefix.append(node)
        node = node.body
    last = max((i for i, q in enumerate(prefix) if q.kind in INFINITESIMAL), default=-1)
    if last < 0:
        return [], f
    return prefix[: last + 1], prefix[last].body


class _Names:
    def __init__(self, f: Formula):
        self.used = set(all_names(f))

    def take(self, base: str) -> str:
        for candidate in itertools.chain([base], (f"{base}{i}" for i in itertools.count(1))):
            if candidate not in self.used:
                self.used.add(candidate)
                return candidate
        raise AssertionError("unreachable")

    def take_from(self, pool: list[str]) -> str:
        for candidate in pool:
            if candidate not in self.used:
                self.used.add(candidate)
                return candidate
        return self.take(pool[-1])


def _postorder(f: Formula, path: tuple = ()):
    kids = children(f)
    for i in reversed(range(len(kids))):
        yield from _postorder(kids[i], path + (i,))
    yield path, f


def _find_redex(f: Formula, names: _Names):
    for path, node in _postorder(f):
        candidates = [
            (COLLAPSE, {}),
            (MERGE, {}),
            (IDEALIZE, {"bounded_var": None}),
            (EXCHANGE, {}),
            (COMMUTE, {"side": "right"}),
            (COMMUTE, {"side": "left"}),
        ]
        for rule, params in candidates:
            if isinstance(node, Not) and rule == COMMUTE:
                params = {}
            if rule == IDEALIZE:
                params = {"bounded_var": _peek_fresh(names, "l")}
            try:
                RULES[rule](node, params)
            except RuleNotApplicable:
                continue
            if rule == IDEALIZE:
                names.used.add(params["bounded_var"])
            return path, rule, params
    return None


def _peek_fresh(names: _Names, base: str) -> str:
    for candidate in itertools.chain([base], (f"{base}{i}" for i in itertools.count(1))):
        if candidate not in names.used:
            return candidate
    raise AssertionError("unreachable")


def _check_shape(f: Formula) -> tuple[list[Quant], str]:
    prefix, matrix = _prefix(f)
    if not prefix:
        offender = next((n for n in walk(f) if isinstance(n, Quant) and n.kind in INFINITESIMAL), None)
        raise UnsupportedShape("no leading in-quantifier prefix", offender)
    for q in prefix:
        if q.kind in STANDARD or q.bound is not None:
            raise UnsupportedShape(f"quantifier {q.kind} {q.var} is not allowed in the input prefix", q)
    if not is_internal(matrix):
        offender = next((n for n in walk(matrix) if isinstance(n, Quant) and n.kind not in PLAIN), None)
        if offender is not None:
            raise UnsupportedShape(f"quantifier {offender.kind} {offender.var} occurs inside the matrix", offender)
        raise UnsupportedShape("the matrix mentions the st predicate", None)
    in_kinds = {q.kind for q in prefix if q.kind in INFINITESIMAL}
    if len(in_kinds) == 1:
        return prefix, "same-kind"
    labels = ["U" if q.kind in ("A", "Ain") else "E" for q in prefix]
    switches = [i for i in range(1, len(labels)) if labels[i] != labels[i - 1]]
    if len(switches) > 1:
        q = prefix[switches[1]]
        raise UnsupportedShape(
            f"quantifier {q.kind} {q.var} starts a third alternation block; "
            "mixed in-quantifiers are supported only in two blocks",
            q,
        )
    return prefix, "blocks"


def rewrite_to_delta_st(f: Formula, collapse: bool = False, max_steps: int = 1000):
    """Rewrite ``f`` into an equivalent Delta-st formula.

    Returns ``(result, trace)``. With ``collapse`` the st marks are erased
    afterwards (valid by Transfer for standard parameters), and that step is
    recorded as well. Formulas already in Delta-st form come back unchanged.
    """
    trace = RewriteTrace()
    if classify_delta_st(f).delta_st:
        current = f
    else:
        prefix, strategy = _check_shape(f)
        names = _Names(f)
        current = f
        if strategy == "same-kind":
            pool = ["m", "n"] + [f"n{i}" for i in range(1, 50)]
            st_vars = [names.take_from(pool) for q in prefix if q.kind in INFINITESIMAL]
            current = trace.append(EXPAND, current, (), {"mode": "same-kind", "st_vars": st_vars})
        else:
            first_universal = prefix[0].kind in ("A", "Ain")
            boundary = next(
                i for i, q in enumerate(prefix) if (q.kind in ("A", "Ain")) != first_universal
            )
            for index, q in enumerate(prefix):
                if q.kind not in INFINITESIMAL:
                    continue
                base = "n" if index < boundary else "m"
                name = names.take(base)
                path = _locate(current, q.var)
                current = trace.append(EXPAND, current, path, {"mode": "block", "st_var": name})
        for _ in range(max_steps):
            found = _find_redex(current, names)
            if found is None:
                break
            path, rule, params = found
            current = trace.append(rule, current, path, params)
        else:
            raise UnsupportedShape("rewriting did not terminate", None)
        verdict = classify_delta_st(current)
        if not verdict.delta_st:
            raise UnsupportedShape(f"rewriting stalled: {verdict.reason}", None)
    if collapse:
        current = trace.append(TRANSFER, current, (), {})
    return current, trace


def _locate(f: Formula, var: str) -> tuple:
    for path, node in _postorder(f):
        if isinstance(node, Quant) and node.var == var and node.kind in INFINITESIMAL:
            return path
    raise KeyError(var)
