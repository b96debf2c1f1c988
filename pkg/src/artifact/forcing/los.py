"""Forcing of ∈-formulas by direct almost-all evaluation.

Formulas use the shared formula grammar.  ``G0``, ``G1``, ... are the generic
names, integer literals are von Neumann numerals and ``{...}`` literals are
hereditarily finite sets.  Plain quantifiers range over the HFSets of rank at
most the configured universe rank.
"""

from __future__ import annotations

import re
from typing import Mapping

from ..errors import ContractViolation, RankError, UnboundVariable
from ..formulas import parse_formula
from ..formulas.syntax import (
    And,
    App,
    Arith,
    Compare,
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
    Truth,
    Var,
    free_vars,
    walk,
)
from .conditions import Condition, almost_all, where
from .hfsets import HFSet, universe, von_neumann
from .indexsets import IndexSet

NAME_RE = re.compile(r"^G(\d+)$")
DEFAULT_UNIVERSE_RANK = 3


def as_formula(phi):
    return parse_formula(phi) if isinstance(phi, str) else phi


def name_index(var: str) -> int | None:
    m = NAME_RE.match(var)
    return int(m.group(1)) if m else None


def name_indices(phi) -> set[int]:
    """Indices of the generic names occurring free in ``phi``."""
    return {n for n in map(name_index, free_vars(phi)) if n is not None}


def constant_rank(phi) -> int:
    """Largest rank of an HFSet literal written in ``phi``."""
    best = 0
    for node in walk(phi):
        for t in _atom_terms(node):
            best = max(best, _literal_rank(t))
    return best


def _atom_terms(node) -> tuple:
    if isinstance(node, (Compare, Member)):
        return (node.left, node.right)
    if isinstance(node, St):
        return (node.term,)
    return ()


def _literal_rank(t) -> int:
    if isinstance(t, Num):
        return t.value
    if isinstance(t, SetLit):
        return 1 + max((_literal_rank(x) for x in t.elements), default=-1)
    return 0


def check_rank(c: Condition, phi) -> None:
    names = name_indices(phi)
    if names and max(names) >= c.rank:
        raise RankError(f"name G{max(names)} needs rank above {max(names)}, condition has rank {c.rank}")


# evaluation in V_r -----------------------------------------------------------------------

def eval_term(t, env: Mapping[str, HFSet]) -> HFSet:
    if isinstance(t, Var):
        if t.name not in env:
            raise UnboundVariable(f"no value for {t.name}")
        return env[t.name]
    if isinstance(t, Num):
        return von_neumann(t.value)
    if isinstance(t, SetLit):
        return HFSet(eval_term(x, env) for x in t.elements)
    if isinstance(t, (App, Arith, Minus)):
        raise ContractViolation("function terms are not part of the ∈-language")
    raise TypeError(t)


def holds(phi, env: Mapping[str, HFSet], universe_rank: int = DEFAULT_UNIVERSE_RANK) -> bool:
    """Truth of an ∈-formula in the hereditarily finite sets."""
    if isinstance(phi, Truth):
        return phi.value
    if isinstance(phi, Compare):
        if phi.op not in ("=", "!="):
            raise ContractViolation(f"the ∈-language has no {phi.op!r}")
        same = eval_term(phi.left, env) == eval_term(phi.right, env)
        return same if phi.op == "=" else not same
    if isinstance(phi, Member):
        return eval_term(phi.left, env) in eval_term(phi.right, env)
    if isinstance(phi, Not):
        return not holds(phi.arg, env, universe_rank)
    if isinstance(phi, And):
        return holds(phi.left, env, universe_rank) and holds(phi.right, env, universe_rank)
    if isinstance(phi, Or):
        return holds(phi.left, env, universe_rank) or holds(phi.right, env, universe_rank)
    if isinstance(phi, Implies):
        return not holds(phi.left, env, universe_rank) or holds(phi.right, env, universe_rank)
    if isinstance(phi, Quant):
        if phi.kind not in ("A", "E") or phi.bound is not None:
            raise ContractViolation(f"quantifier {phi.kind} is not part of the ∈-language")
        test = all if phi.kind == "A" else any
        return test(holds(phi.body, {**env, phi.var: x}, universe_rank) for x in universe(universe_rank))
    if isinstance(phi, St):
        raise ContractViolation("st-formulas have no almost-all reading; use forces_clausal")
    if isinstance(phi, (Pred, Mag)):
        raise ContractViolation("predicate symbols are not part of the ∈-language")
    raise TypeError(phi)


def _tuple_env(t: tuple) -> dict[str, HFSet]:
    return {f"G{j}": x for j, x in enumerate(t)}


def pointwise(c: Condition, phi, universe_rank: int = DEFAULT_UNIVERSE_RANK):
    """``i -> every tuple of q(i) satisfies phi`` together with its periodicity pattern."""
    bound = max(universe_rank, constant_rank(phi))
    pattern = c.q.pattern(bound)

    def pred(i: int) -> bool:
        return all(holds(phi, _tuple_env(t), universe_rank) for t in c.q.value(i))

    return pattern, pred


def forces_los(c: Condition, phi, universe_rank: int = DEFAULT_UNIVERSE_RANK) -> bool:
    """``c`` forces the ∈-formula ``phi``: for almost all i in p, every tuple of q(i) satisfies it."""
    phi = as_formula(phi)
    check_rank(c, phi)
    pattern, pred = pointwise(c, phi, universe_rank)
    return almost_all(c.p, pattern, pred)


def truth_set(c: Condition, phi, universe_rank: int = DEFAULT_UNIVERSE_RANK) -> IndexSet:
    """``{i in p : every tuple of q(i) satisfies phi}``."""
    phi = as_formula(phi)
    check_rank(c, phi)
    pattern, pred = pointwise(c, phi, universe_rank)
    return where(c.p, pattern, pred)

