"""Clause-by-clause forcing over a finite space of conditions.

The negation and existential clauses quantify over all extensions of a
condition.  Here those quantifiers range over an explicit
:class:`ConditionSpace`, so verdicts are relative to the space: ``forced``
means the condition forces the formula, ``refuted`` means it forces the
negation, and ``unknown`` means neither holds within the space.

Forced sets are computed for every condition of the space at once and kept
as Python integers used as bitsets, which makes the extension quantifiers
cheap set operations.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import reduce
from math import lcm

from ..errors import ContractViolation
from ..formulas.syntax import (
    And,
    Compare,
    Implies,
    Member,
    Not,
    Or,
    Quant,
    SetLit,
    St,
    Truth,
    Var,
    Num,
    substitute,
)
from .conditions import Condition, extends
from .fibers import TabularFiber, default_value
from .hfsets import EMPTY, hf
from .indexsets import IndexSet
from .los import DEFAULT_UNIVERSE_RANK, as_formula, check_rank, forces_los, name_index, name_indices

FORCED, REFUTED, UNKNOWN = "forced", "refuted", "unknown"


def default_values(rank: int) -> list[frozenset]:
    """The fiber values used by the exhaustive space for each rank up to 2."""
    zero, one = EMPTY, hf(EMPTY)
    if rank == 0:
        return [frozenset({()})]
    if rank == 1:
        atoms = [(zero,), (one,)]
        return [frozenset(s) for n in (1, 2) for s in itertools.combinations(atoms, n)]
    if rank == 2:
        return [frozenset({(a, b)}) for a in (zero, one) for b in (zero, one)]
    raise ContractViolation("the default value catalog stops at rank 2")


def bit_patterns(prelude_cap: int, period_cap: int):
    for n in range(prelude_cap + 1):
        for pre in itertools.product((False, True), repeat=n):
            for m in range(1, period_cap + 1):
                for per in itertools.product((False, True), repeat=m):
                    yield pre, per


def restricted(p: IndexSet, q: TabularFiber) -> TabularFiber:
    """``q`` on ``p`` and the filler value elsewhere."""
    start = max(p.start, len(q.prelude))
    period = lcm(p.cycle, len(q.period))
    filler = default_value(q.rank)
    return TabularFiber.from_function(q.rank, lambda i: q.value(i) if i in p else filler, start, period)


@dataclass
class ConditionSpace:
    """A finite set of conditions closed enough to test the forcing clauses.

    ``conditions[j]`` is the j-th condition; ``below[j]`` is the bitset of the
    conditions in the space that extend it (itself included).
    """

    conditions: list
    below: list
    universe_rank: int = DEFAULT_UNIVERSE_RANK

    def __post_init__(self):
        self.index = {c: j for j, c in enumerate(self.conditions)}
        self.full = (1 << len(self.conditions)) - 1

    def __len__(self) -> int:
        return len(self.conditions)

    @property
    def max_rank(self) -> int:
        return max(c.rank for c in self.conditions)

    @classmethod
    def from_conditions(cls, conditions, universe_rank: int = DEFAULT_UNIVERSE_RANK) -> "ConditionSpace":
        conditions = list(dict.fromkeys(conditions))
        below = []
        for c1 in conditions:
            mask = 0
            for j, c2 in enumerate(conditions):
                if extends(c2, c1):
                    mask |= 1 << j
            below.append(mask)
        return cls(conditions, below, universe_rank)

    @classmethod
    def exhaustive(
        cls,
        prelude_cap: int = 2,
        period_cap: int = 2,
        rank_cap: int = 2,
        universe_rank: int = DEFAULT_UNIVERSE_RANK,
        values=default_values,
    ) -> "ConditionSpace":
        """Every condition whose index set and fiber have prelude and period within the caps.

        Fibers take values from ``values(rank)`` on ``p`` and the filler value
        off ``p``, so two conditions that differ only off their index set are
        not listed twice.
        """
        index_sets = {IndexSet(pre, per) for pre, per in bit_patterns(prelude_cap, period_cap)}
        index_sets = sorted((p for p in index_sets if p.is_unbounded()), key=_index_key)
        conditions = []
        for rank in range(rank_cap + 1):
            catalog = values(rank)
            shapes = [
                (pre, per)
                for m in range(1, period_cap + 1)
                for pre in itertools.product(catalog, repeat=prelude_cap)
                for per in itertools.product(catalog, repeat=m)
            ]
            for p in index_sets:
                seen = {}
                for pre, per in shapes:
                    q = restricted(p, TabularFiber(rank, pre, per))
                    seen.setdefault(q, None)
                conditions.extend(Condition(p, q) for q in seen)
        window = prelude_cap + lcm(*range(1, period_cap + 1))
        return cls(conditions, _fast_below(conditions, prelude_cap, window), universe_rank)

    # masks ----------------------------------------------------------------------------
    def mask_of(self, pred) -> int:
        mask = 0
        for j, c in enumerate(self.conditions):
            if pred(c):
                mask |= 1 << j
        return mask

    def some_below(self, target: int) -> int:
        """Conditions with an extension in ``target``."""
        return self.mask_of_index(lambda j: self.below[j] & target)

    def all_below(self, target: int) -> int:
        """Conditions all of whose extensions lie in ``target``."""
        return self.mask_of_index(lambda j: self.below[j] & ~target == 0)

    def mask_of_index(self, pred) -> int:
        mask = 0
        for j in range(len(self.conditions)):
            if pred(j):
                mask |= 1 << j
        return mask

    def members(self, mask: int) -> list:
        return [c for j, c in enumerate(self.conditions) if mask >> j & 1]


def _index_key(p: IndexSet):
    return (len(p.prelude), p.prelude, len(p.period), p.period)


def _fast_below(conditions, periodic_from: int, window: int) -> list[int]:
    """Extension bitsets for conditions that all repeat with one period after ``periodic_from``.

    Inclusion of index sets is read off the window; prefix containment only
    matters on the repeating part because the prelude is a finite exception.
    """
    tail = range(periodic_from, window)
    sig = []
    for c in conditions:
        bits = tuple(i in c.p for i in range(window))
        prefixes = [
            {i: frozenset(t[:k] for t in c.q.value(i)) for i in tail if i in c.p} for k in range(c.rank + 1)
        ]
        vals = {i: c.q.value(i) for i in tail}
        sig.append((c.rank, bits, prefixes, vals))
    below = []
    for rank1, bits1, _, vals1 in sig:
        mask = 0
        for j, (rank2, bits2, prefixes2, _) in enumerate(sig):
            if rank2 < rank1 or any(b2 and not b1 for b1, b2 in zip(bits1, bits2)):
                continue
            if all(pre <= vals1[i] for i, pre in prefixes2[rank1].items()):
                mask |= 1 << j
        below.append(mask)
    return below


# the forcing clauses ---------------------------------------------------------------------

def normalize(phi):
    """Rewrite into the primitive connectives ``not``, ``and`` and ``E``."""
    if isinstance(phi, Compare) and phi.op == "!=":
        return Not(Compare("=", phi.left, phi.right))
    if isinstance(phi, (Compare, Member, St, Truth)):
        if isinstance(phi, Compare) and phi.op != "=":
            raise ContractViolation(f"the ∈-language has no {phi.op!r}")
        return phi
    if isinstance(phi, Not):
        return Not(normalize(phi.arg))
    if isinstance(phi, And):
        return And(normalize(phi.left), normalize(phi.right))
    if isinstance(phi, Or):
        return Not(And(Not(normalize(phi.left)), Not(normalize(phi.right))))
    if isinstance(phi, Implies):
        return Not(And(normalize(phi.left), Not(normalize(phi.right))))
    if isinstance(phi, Quant):
        if phi.kind not in ("A", "E") or phi.bound is not None:
            raise ContractViolation(f"quantifier {phi.kind} is not part of the st-∈-language")
        body = normalize(phi.body)
        if phi.kind == "E":
            return Quant("E", phi.var, body, phi.sort)
        return Not(Quant("E", phi.var, Not(body), phi.sort))
    raise ContractViolation(f"{type(phi).__name__} is not part of the st-∈-language")


def _rank_ok(c: Condition, phi) -> bool:
    names = name_indices(phi)
    return not names or max(names) < c.rank


def _constant_term(t) -> bool:
    if isinstance(t, Num):
        return True
    if isinstance(t, SetLit):
        return all(_constant_term(x) for x in t.elements)
    return False


def _stable(c: Condition, n: int) -> bool:
    """The n-th column takes a single value at almost every index of p.

    Two consecutive pattern windows are compared so that a column growing
    with the index (period 1 past its threshold) is seen to change.
    """
    if n >= c.rank:
        return False
    start, period = c.q.pattern(0)
    start = max(start, c.p.start)
    width = lcm(period, c.p.cycle)
    values: set = set()
    for i in range(start, start + 2 * width):
        if i in c.p:
            values |= c.q.column(i, n)
    return len(values) == 1


def _direct(c: Condition, phi, universe_rank: int) -> bool:
    """Forcing of an atomic or st-atomic formula (no extensions involved)."""
    if isinstance(phi, Truth):
        return phi.value
    if isinstance(phi, St):
        if _constant_term(phi.term):
            return True
        if isinstance(phi.term, Var) and name_index(phi.term.name) is not None:
            return _stable(c, name_index(phi.term.name))
        raise ContractViolation("st applies to names and set constants")
    if not _rank_ok(c, phi):
        return False
    return forces_los(c, phi, universe_rank)


def _instances(phi: Quant, max_rank: int):
    for m in range(max_rank):
        yield substitute(phi.body, phi.var, Var(f"G{m}"))


class ForcingEvaluator:
    """Forced sets over a space, memoized per subformula.

    ``forced`` is a lower bound: every condition in it forces the formula.
    ``possible`` is an upper bound: conditions outside it do not.  They differ
    only for existentials, whose witnesses may need more columns than the
    space offers, so a negated existential is only concluded from ``possible``.
    """

    def __init__(self, space: ConditionSpace):
        self.space = space
        self.memo: dict = {}

    def forced(self, phi) -> int:
        return self._masks(phi)[0]

    def possible(self, phi) -> int:
        return self._masks(phi)[1]

    def _masks(self, phi) -> tuple[int, int]:
        if phi in self.memo:
            return self.memo[phi]
        sp = self.space
        if isinstance(phi, (Compare, Member, St, Truth)):
            mask = sp.mask_of(lambda c: _direct(c, phi, sp.universe_rank))
            masks = (mask, mask)
        elif isinstance(phi, Not):
            low, high = self._masks(phi.arg)
            ok = lambda j: _rank_ok(sp.conditions[j], phi)
            masks = (
                sp.mask_of_index(lambda j: ok(j) and not sp.below[j] & high),
                sp.mask_of_index(lambda j: ok(j) and not sp.below[j] & low),
            )
        elif isinstance(phi, And):
            a, b = self._masks(phi.left), self._masks(phi.right)
            masks = (a[0] & b[0], a[1] & b[1])
        elif isinstance(phi, Quant):
            witnesses = reduce(lambda a, b: a | b, (self.forced(f) for f in _instances(phi, sp.max_rank)), 0)
            reachable = sp.some_below(witnesses)
            masks = (
                sp.mask_of_index(lambda j: _rank_ok(sp.conditions[j], phi) and sp.below[j] & ~reachable == 0),
                sp.mask_of(lambda c: _rank_ok(c, phi)),
            )
        else:
            raise TypeError(phi)
        self.memo[phi] = masks
        return masks

    def forced_at(self, c: Condition, phi, upper: bool = False) -> bool:
        """Whether ``c`` forces ``phi`` (``upper``: whether it may); ``c`` need not belong to the space."""
        sp = self.space
        j = sp.index.get(c)
        if j is not None:
            return bool(self._masks(phi)[upper] >> j & 1)
        if isinstance(phi, (Compare, Member, St, Truth)):
            return _direct(c, phi, sp.universe_rank)
        if isinstance(phi, And):
            return self.forced_at(c, phi.left, upper) and self.forced_at(c, phi.right, upper)
        if isinstance(phi, Quant) and upper:
            return _rank_ok(c, phi)
        below = sp.mask_of(lambda d: extends(d, c))
        if isinstance(phi, Not):
            flip = not upper
            return (
                _rank_ok(c, phi)
                and not self.forced_at(c, phi.arg, flip)
                and not below & self._masks(phi.arg)[flip]
            )
        if isinstance(phi, Quant):
            instances = list(_instances(phi, max(sp.max_rank, c.rank)))
            witnesses = reduce(lambda a, b: a | b, (self.forced(f) for f in instances), 0)
            reachable = sp.some_below(witnesses)
            self_ok = any(self.forced_at(c, f) for f in instances) or bool(below & witnesses)
            return _rank_ok(c, phi) and self_ok and below & ~reachable == 0
        raise TypeError(phi)

    def verdict(self, c: Condition, phi) -> str:
        phi = normalize(as_formula(phi))
        check_rank(c, phi)
        if self.forced_at(c, phi):
            return FORCED
        if self.forced_at(c, Not(phi)):
            return REFUTED
        return UNKNOWN


_EVALUATORS: dict[int, ForcingEvaluator] = {}


def evaluator_for(space: ConditionSpace) -> ForcingEvaluator:
    ev = _EVALUATORS.get(id(space))
    if ev is None or ev.space is not space:
        ev = _EVALUATORS[id(space)] = ForcingEvaluator(space)
    return ev


def forces_clausal(c: Condition, phi, space: ConditionSpace) -> str:
    """``forced``, ``refuted`` or ``unknown`` for ``c`` and an st-∈-formula, relative to ``space``."""
    return evaluator_for(space).verdict(c, phi)

