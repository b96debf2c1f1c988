"""Named constructions on conditions.

Each function returns new conditions that extend their input; the
accompanying checks use the almost-all evaluation of :mod:`.los`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

from ..errors import ClaimOneFailure, ContractViolation, NonConvergence, Undecided
from ..formulas.syntax import Compare, Member, Not, Num, Var
from .conditions import Condition, extends
from .fibers import (
    ExtendedFiber,
    FilteredFiber,
    GenerativeFiber,
    PiecewiseFiber,
    TabularFiber,
    _rule_stats,
)
from .hfsets import HFSet, format_hf, rank, von_neumann
from .indexsets import IndexSet
from .los import forces_los, truth_set


def fix_constant(c: Condition, z: HFSet) -> tuple[Condition, int]:
    """Append a column equal to ``z``; the new name is forced equal to ``z``."""
    return Condition(c.p, ExtendedFiber(c.q, z)), c.rank


def diag_name(c: Condition) -> tuple[Condition, int]:
    """Append the column ``vN(i)``; the new name differs from every numeral."""
    return Condition(c.p, ExtendedFiber(c.q, None)), c.rank


def differs_from_numerals(c: Condition, m: int, bound: int) -> list[bool]:
    """``c`` forces ``G_m != n`` for each ``n <= bound``."""
    return [forces_los(c, Not(_equals(m, n))) for n in range(bound + 1)]


def _equals(m: int, n: int) -> Compare:
    return Compare("=", Var(f"G{m}"), Num(n))


def _member(n: int, m: int) -> Member:
    return Member(Num(n), Var(f"G{m}"))


def decides(c: Condition, phi) -> bool:
    return forces_los(c, phi) or forces_los(c, Not(phi))


# deciding membership ---------------------------------------------------------------------

@dataclass
class Staircase:
    """The intermediate conditions and least elements of the membership construction."""

    steps: list = field(default_factory=list)  # (condition, least element, branch)
    result: Condition | None = None


def decide_membership(c: Condition, m: int, bound: int, trace: Staircase | None = None) -> Condition:
    """An extension of ``c`` deciding ``n in G_m`` for every ``n <= bound``.

    Step ``n`` keeps the indices where every tuple has ``n`` in column ``m``
    when there are unboundedly many, and otherwise keeps the rest and drops
    the offending tuples.  The least remaining index is then discarded.  The
    result follows step ``n`` between the least elements of steps ``n`` and
    ``n + 1`` and the last step afterwards.
    """
    if not 0 <= m < c.rank:
        raise ContractViolation(f"name G{m} is outside rank {c.rank}")
    trace = trace if trace is not None else Staircase()
    current = c
    stages = [c]
    for n in range(bound + 1):
        atom = _member(n, m)
        yes = truth_set(current, atom)
        if yes.is_unbounded():
            branch, chosen = "member", Condition(yes, current.q)
        else:
            rest = current.p - yes
            if not rest.is_unbounded():
                raise ContractViolation("neither branch is unbounded")
            kept = FilteredFiber(
                current.q, rest, lambda t, n=n: von_neumann(n) not in t[m], n, f"{n} not in G{m}"
            )
            branch, chosen = "non-member", Condition(rest, kept)
        trace.steps.append((current, current.p.least(), branch))
        current = Condition(chosen.p.drop_least(), chosen.q)
        stages.append(current)
    least = [s.p.least() for s in stages]
    p_out = IndexSet([], [False])
    for n in range(bound + 1):
        p_out = p_out | (stages[n].p.from_(least[n]).below(least[n + 1]))
    p_out = p_out | stages[-1].p.from_(least[-1])
    q_out = PiecewiseFiber(tuple(least), tuple(s.q for s in stages[:-1]), stages[-1].q)
    out = Condition(p_out, q_out)
    trace.result = out
    return out


def standard_part_name(c: Condition, m: int, bound: int) -> list[int]:
    """Bit ``n`` is 1 when ``c`` forces ``n in G_m`` and 0 when it forces the negation."""
    bits = []
    for n in range(bound + 1):
        atom = _member(n, m)
        if forces_los(c, atom):
            bits.append(1)
        elif forces_los(c, Not(atom)):
            bits.append(0)
        else:
            raise Undecided(f"the condition does not decide {n} in G{m}")
    return bits


# descending chains -----------------------------------------------------------------------

Rule = tuple[str, Callable[[Condition], Condition]]


def pseudo_generic(start: Condition, rules: Sequence[Rule]) -> list[Condition]:
    """Apply each extension finder in turn, checking that every link extends the previous one."""
    chain = [start]
    for description, finder in rules:
        nxt = finder(chain[-1])
        if not isinstance(nxt, Condition) or not extends(nxt, chain[-1]):
            raise ContractViolation(f"rule {description!r} did not return an extension")
        chain.append(nxt)
    return chain


# splitting a fiber -----------------------------------------------------------------------

@dataclass
class Split:
    p1: IndexSet
    p2: IndexSet
    choices: dict  # index -> nonempty subset of r(index)
    stages: list  # (position n, alpha) in position coordinates


def _growth_certificate(r) -> int:
    """Largest offset of a rule whose every row grows with the index.

    A term mentioning ``vN(i + c)`` has rank at least ``i + c``, so a value of
    rank ``d`` can occur only at indices ``i <= d - c``.
    """
    if isinstance(r, TabularFiber):
        raise ClaimOneFailure(f"tabular fiber repeats the value {format_hf(_some_value(r))} forever")
    if not isinstance(r, GenerativeFiber):
        raise ContractViolation("splitting needs a generative rule")
    if r.rank != 1:
        raise ContractViolation("splitting needs a rank-1 fiber")
    offset = 0
    for row in r.rows:
        _, off, _, grows = _rule_stats(row[0])
        if not grows:
            raise ClaimOneFailure(f"the row {row!r} does not depend on the index")
        offset = max(offset, off)
    return offset


def _some_value(r: TabularFiber) -> HFSet:
    return next(iter(r.period[0]))[0]


def split_fibers(r, p: IndexSet, horizon: int = 64) -> Split:
    """Two disjoint unbounded parts of ``p`` whose chosen values never meet.

    Works in position coordinates along ``p``: ``last(x)`` is the last position
    whose value contains ``x``.  Stage positions start at 0 and each next one
    follows the least ``last`` of the current values; the values attaining it
    are chosen.  Even stages form ``p1`` and odd stages ``p2``.
    """
    p.require_unbounded()
    offset = _growth_certificate(r)

    def values(pos: int) -> set:
        return {t[0] for t in r.value(p.nth(pos))}

    def last(x: HFSet) -> int:
        top = 0
        pos = 0
        while p.nth(pos) <= rank(x) + offset:
            if x in values(pos):
                top = pos
            pos += 1
        return top

    stages: list = []
    choices: dict = {}
    n = 0
    while n < horizon:
        here = values(n)
        alpha = min(last(x) for x in here)
        choices[p.nth(n)] = frozenset(x for x in here if last(x) == alpha)
        stages.append((n, alpha))
        n = alpha + 1
    positions = [s[0] for s in stages]
    if len(positions) < 4:
        raise NonConvergence("too few stages below the horizon; raise it")
    step = positions[-1] - positions[-2]
    tail = len(positions) - 1
    while tail > 0 and positions[tail] - positions[tail - 1] == step:
        tail -= 1
    if len(positions) - tail < 4:
        raise NonConvergence("stage positions are not yet evenly spaced below the horizon")
    first = positions[tail]
    even = _stage_set(positions[:tail], first, step, tail % 2 == 0, parity=0)
    odd = _stage_set(positions[:tail], first, step, tail % 2 == 1, parity=1)
    split = Split(p.select(even), p.select(odd), choices, stages)
    _check_disjoint(split, horizon)
    return split


def _stage_set(early: list, first: int, step: int, first_is_mine: bool, parity: int) -> IndexSet:
    mine_early = [pos for j, pos in enumerate(early) if j % 2 == parity]
    offset = 0 if first_is_mine else step
    return IndexSet.from_predicate(
        lambda k: k in mine_early or (k >= first and (k - first) % (2 * step) == offset),
        first,
        2 * step,
    )


def _check_disjoint(split: Split, horizon: int) -> None:
    left = set().union(*(v for i, v in split.choices.items() if i in split.p1))
    right = set().union(*(v for i, v in split.choices.items() if i in split.p2))
    if left & right or (split.p1 & split.p2).members_below(horizon):
        raise ContractViolation("the two halves of the split meet below the horizon")
    for i, v in split.choices.items():
        if i not in split.p1 and i not in split.p2:
            raise ContractViolation(f"stage index {i} fell outside both halves")
        if not v:
            raise ContractViolation(f"empty choice at {i}")
