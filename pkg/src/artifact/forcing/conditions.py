"""Forcing conditions: an unbounded index set paired with a fiber."""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Callable

from ..errors import InputSyntaxError, NotUnbounded
from .fibers import Fiber, format_fiber, one_point_one, parse_fiber
from .indexsets import NATURALS, IndexSet, format_index_set, parse_index_set


@dataclass(frozen=True)
class Condition:
    p: IndexSet
    q: Fiber

    def __post_init__(self):
        if not self.p.is_unbounded():
            raise NotUnbounded(f"condition index set {format_index_set(self.p)} is bounded")

    @property
    def rank(self) -> int:
        return self.q.rank

    def with_p(self, p: IndexSet) -> "Condition":
        return Condition(p, self.q)

    def __str__(self) -> str:
        return format_condition(self)


def trivial_condition() -> Condition:
    """``<N, 1>``, extended by every condition over N."""
    return Condition(NATURALS, one_point_one())


def window(p: IndexSet, pattern: tuple[int, int]) -> range:
    start = max(p.start, pattern[0])
    return range(start, start + lcm(p.cycle, pattern[1]))


def almost_all(p: IndexSet, pattern: tuple[int, int], pred: Callable[[int], bool]) -> bool:
    """``pred(i)`` for all but finitely many ``i`` in ``p``.

    Beyond ``window(p, pattern).start`` both ``p`` and ``pred`` repeat with the
    window length, so a failure there recurs forever and a failure before it
    is a finite exception.
    """
    return all(pred(i) for i in window(p, pattern) if i in p)


def where(p: IndexSet, pattern: tuple[int, int], pred: Callable[[int], bool]) -> IndexSet:
    """``{i in p : pred(i)}`` as an index set."""
    w = window(p, pattern)
    return IndexSet.from_predicate(lambda i: i in p and pred(i), w.start, len(w))


def extends(c2: Condition, c1: Condition) -> bool:
    """``c2 <= c1``: smaller index set, larger rank, tuple prefixes contained almost everywhere."""
    if c2.rank < c1.rank or not c2.p.issubset(c1.p):
        return False
    k = c1.rank
    pattern = _joint_pattern(c1.q, c2.q)

    def prefixes_fit(i: int) -> bool:
        allowed = c1.q.value(i)
        return all(t[:k] in allowed for t in c2.q.value(i))

    return almost_all(c2.p, pattern, prefixes_fit)


def _joint_pattern(q1: Fiber, q2: Fiber) -> tuple[int, int]:
    bound = max(q1.constant_rank(), q2.constant_rank())
    s1, l1 = q1.pattern(bound)
    s2, l2 = q2.pattern(bound)
    return max(s1, s2), lcm(l1, l2)


# text format ------------------------------------------------------------------------------

def format_condition(c: Condition) -> str:
    return f"p: {format_index_set(c.p)}\nq: {format_fiber(c.q)}"


def parse_condition(text: str) -> Condition:
    """Parse the two-line ``p: ...`` / ``q: ...`` condition format.

    A missing ``q`` line means the rank-0 unit fiber.  Lines starting with ``#``
    are ignored.
    """
    p_text = q_text = None
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        key, _, rest = line.partition(":")
        key = key.strip()
        if key == "p":
            p_text = rest
        elif key == "q":
            q_text = rest
        else:
            raise InputSyntaxError(f"unknown condition line {line!r}", 0, text)
    if p_text is None:
        raise InputSyntaxError("a condition needs a 'p:' line", 0, text)
    p = parse_index_set(p_text)
    q = parse_fiber(q_text) if q_text is not None else one_point_one()
    return Condition(p, q)
