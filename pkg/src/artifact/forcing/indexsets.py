"""Eventually periodic subsets of the natural numbers.

An :class:`IndexSet` is a finite prelude of membership bits followed by a
period repeated forever.  Such sets are closed under the Boolean operations,
least-element removal and finite edits, and "for almost all i in p" becomes a
check over one period window.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from math import lcm
from typing import Callable, Iterable, Iterator

from ..errors import InputSyntaxError, NotUnbounded


def _minimal(prelude: tuple[bool, ...], period: tuple[bool, ...]) -> tuple[tuple[bool, ...], tuple[bool, ...]]:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period == period[:d] * (n // d):
            period = period[:d]
            break
    while prelude and prelude[-1] == period[-1]:
        prelude = prelude[:-1]
        period = period[-1:] + period[:-1]
    return prelude, period


@dataclass(frozen=True)
class IndexSet:
    prelude: tuple[bool, ...]
    period: tuple[bool, ...]

    def __init__(self, prelude: Iterable = (), period: Iterable = (True,)):
        pre = tuple(bool(b) for b in prelude)
        per = tuple(bool(b) for b in period)
        if not per:
            raise ValueError("the period must be nonempty")
        pre, per = _minimal(pre, per)
        object.__setattr__(self, "prelude", pre)
        object.__setattr__(self, "period", per)

    # constructors ------------------------------------------------------------------------
    @classmethod
    def from_predicate(cls, pred: Callable[[int], bool], start: int, period: int) -> "IndexSet":
        """Set of ``i`` with ``pred(i)``, given that ``pred`` has period ``period`` from ``start`` on."""
        return cls([pred(i) for i in range(start)], [pred(i) for i in range(start, start + period)])

    @classmethod
    def finite(cls, elements: Iterable[int]) -> "IndexSet":
        members = set(elements)
        top = max(members, default=-1)
        return cls([i in members for i in range(top + 1)], [False])

    @classmethod
    def residue(cls, modulus: int, remainder: int, start: int = 0) -> "IndexSet":
        return cls.from_predicate(lambda i: i >= start and i % modulus == remainder, start, modulus)

    # structure ---------------------------------------------------------------------------
    @property
    def start(self) -> int:
        return len(self.prelude)

    @property
    def cycle(self) -> int:
        return len(self.period)

    def __contains__(self, i: int) -> bool:
        if i < 0:
            return False
        if i < self.start:
            return self.prelude[i]
        return self.period[(i - self.start) % self.cycle]

    def is_unbounded(self) -> bool:
        return any(self.period)

    def require_unbounded(self, what: str = "index set") -> "IndexSet":
        if not self.is_unbounded():
            raise NotUnbounded(f"{what} {format_index_set(self)} is bounded")
        return self

    def is_empty(self) -> bool:
        return not any(self.prelude) and not any(self.period)

    def __iter__(self) -> Iterator[int]:
        if self.is_unbounded():
            i = 0
            while True:
                if i in self:
                    yield i
                i += 1
        else:
            yield from (i for i, b in enumerate(self.prelude) if b)

    def members_below(self, bound: int) -> list[int]:
        return [i for i in range(bound) if i in self]

    def least(self) -> int:
        for i in self:
            return i
        raise NotUnbounded("empty index set has no least element")

    def nth(self, k: int) -> int:
        """The ``k``-th element in increasing order, counting from 0."""
        if k < 0:
            raise IndexError(k)
        pre = [i for i, b in enumerate(self.prelude) if b]
        if k < len(pre):
            return pre[k]
        k -= len(pre)
        offsets = [j for j, b in enumerate(self.period) if b]
        if not offsets:
            raise IndexError("bounded index set has no such element")
        blocks, r = divmod(k, len(offsets))
        return self.start + blocks * self.cycle + offsets[r]

    def position(self, i: int) -> int:
        """Number of elements smaller than ``i``."""
        if i <= self.start:
            return sum(self.prelude[:i])
        count = sum(self.prelude)
        blocks, r = divmod(i - self.start, self.cycle)
        return count + blocks * sum(self.period) + sum(self.period[:r])

    def density(self) -> tuple[int, int]:
        """(members per period, period length) of the repeating part."""
        return sum(self.period), self.cycle

    # algebra -----------------------------------------------------------------------------
    def _combine(self, other: "IndexSet", op: Callable[[bool, bool], bool]) -> "IndexSet":
        start = max(self.start, other.start)
        period = lcm(self.cycle, other.cycle)
        return IndexSet.from_predicate(lambda i: op(i in self, i in other), start, period)

    def __and__(self, other: "IndexSet") -> "IndexSet":
        return self._combine(other, lambda a, b: a and b)

    def __or__(self, other: "IndexSet") -> "IndexSet":
        return self._combine(other, lambda a, b: a or b)

    def __sub__(self, other: "IndexSet") -> "IndexSet":
        return self._combine(other, lambda a, b: a and not b)

    def complement(self) -> "IndexSet":
        return IndexSet([not b for b in self.prelude], [not b for b in self.period])

    def issubset(self, other: "IndexSet") -> bool:
        return (self - other).is_empty()

    def __le__(self, other: "IndexSet") -> bool:
        return self.issubset(other)

    def finite_difference(self, other: "IndexSet") -> bool:
        """True when the two sets differ in finitely many places."""
        return not any(((self - other) | (other - self)).period)

    def drop_least(self) -> "IndexSet":
        return self - IndexSet.finite([self.least()])

    def with_edits(self, add: Iterable[int] = (), remove: Iterable[int] = ()) -> "IndexSet":
        return (self | IndexSet.finite(add)) - IndexSet.finite(remove)

    def below(self, bound: int) -> "IndexSet":
        return self & IndexSet([True] * bound, [False])

    def from_(self, bound: int) -> "IndexSet":
        return self - IndexSet([True] * bound, [False])

    def select(self, positions: "IndexSet") -> "IndexSet":
        """The elements of ``self`` whose positions (in increasing order) lie in ``positions``."""
        if not self.is_unbounded():
            return IndexSet.finite(self.nth(k) for k in range(sum(self.prelude)) if k in positions)
        count, _ = self.density()
        threshold = self.nth(sum(self.prelude) + positions.start + count * positions.cycle)
        start = max(self.start, threshold)
        period = self.cycle * positions.cycle
        return IndexSet.from_predicate(lambda i: i in self and self.position(i) in positions, start, period)


NATURALS = IndexSet([], [True])
EVENS = IndexSet([], [True, False])
ODDS = IndexSet([], [False, True])


def format_index_set(p: IndexSet) -> str:
    bits = lambda bs: "".join("1" if b else "0" for b in bs)
    return f"prelude={bits(p.prelude)} period={bits(p.period)}"


_INDEX_RE = re.compile(r"^\s*prelude=([01]*)\s+period=([01]+)\s*$")


def parse_index_set(text: str) -> IndexSet:
    """Parse ``prelude=110 period=10``; ``N``, ``evens`` and ``odds`` are accepted as shorthands."""
    short = {"N": NATURALS, "naturals": NATURALS, "evens": EVENS, "odds": ODDS}
    if text.strip() in short:
        return short[text.strip()]
    m = _INDEX_RE.match(text)
    if not m:
        raise InputSyntaxError("index sets look like 'prelude=110 period=10'", 0, text)
    return IndexSet([c == "1" for c in m.group(1)], [c == "1" for c in m.group(2)])


# increasing maps --------------------------------------------------------------------------

@dataclass(frozen=True)
class IncreasingMap:
    """The increasing bijection from ``domain`` onto ``target``, sent to 0 off ``domain``."""

    domain: IndexSet
    target: IndexSet

    def __post_init__(self):
        self.domain.require_unbounded("domain")
        self.target.require_unbounded("target")

    def __call__(self, i: int) -> int:
        if i not in self.domain:
            return 0
        return self.target.nth(self.domain.position(i))

    def preimage(self, sub: IndexSet) -> IndexSet:
        """``domain`` intersected with the preimage of ``sub``; the poset isomorphism on index sets."""
        return self.domain.select(_positions_of(self.target, sub))


def _positions_of(p: IndexSet, sub: IndexSet) -> IndexSet:
    """Positions ``k`` such that the ``k``-th element of ``p`` lies in ``sub``."""
    count, _ = p.density()
    start_pos = p.position(max(p.start, sub.start))
    period = count * sub.cycle
    return IndexSet.from_predicate(lambda k: p.nth(k) in sub, start_pos, period)
