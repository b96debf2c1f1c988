"""Hereditarily finite sets.

An :class:`HFSet` is a frozenset whose elements are again HFSets, so
extensional equality and hashing come for free.  Printing uses a canonical
order (by rank, then recursively by printed form) so every value has exactly
one text form.  Natural numbers are von Neumann ordinals: ``n = {0, ..., n-1}``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

from ..errors import InputSyntaxError, RankError


_INTERNED: dict = {}


class HFSet(frozenset):
    """Interned: equal sets are the same object, which keeps deep comparisons cheap."""

    __slots__ = ()

    def __new__(cls, elements=()):
        items = tuple(elements)
        for x in items:
            if not isinstance(x, HFSet):
                raise TypeError(f"HFSet elements must be HFSets, got {type(x).__name__}")
        fresh = super().__new__(cls, items)
        return _INTERNED.setdefault(fresh, fresh)

    def __repr__(self) -> str:
        return f"HFSet({format_hf(self)})"

    def __str__(self) -> str:
        return format_hf(self)


EMPTY = HFSet()


def hf(*elements: HFSet) -> HFSet:
    return HFSet(elements)


@lru_cache(maxsize=None)
def rank(x: HFSet) -> int:
    """0 for the empty set, otherwise one more than the largest element rank."""
    return 1 + max(map(rank, x)) if x else 0


@lru_cache(maxsize=None)
def von_neumann(n: int) -> HFSet:
    if n < 0:
        raise ValueError("von Neumann numerals are nonnegative")
    current = EMPTY
    for _ in range(n):
        current = HFSet(current | {current})
    return current


def as_natural(x: HFSet) -> int | None:
    n = len(x)
    return n if von_neumann(n) == x else None


@lru_cache(maxsize=None)
def _sort_key(x: HFSet) -> tuple:
    return (rank(x), len(x), tuple(sorted(_sort_key(y) for y in x)))


def canonical_elements(x: HFSet) -> list[HFSet]:
    return sorted(x, key=_sort_key)


@lru_cache(maxsize=4096)
def format_hf(x: HFSet, numerals: bool = False) -> str:
    """Brace notation; with ``numerals`` von Neumann ordinals print as integers."""
    if numerals:
        n = as_natural(x)
        if n is not None:
            return str(n)
    return "{" + ", ".join(format_hf(y, numerals) for y in canonical_elements(x)) + "}"


@lru_cache(maxsize=None)
def universe(max_rank: int) -> tuple[HFSet, ...]:
    """All HFSets of rank at most ``max_rank`` in canonical order (1, 2, 4, 16, 65536 sets)."""
    if max_rank < 0:
        return ()
    if max_rank > 4:
        raise RankError("universes above rank 4 are too large to enumerate")
    below = universe(max_rank - 1)
    sets = [HFSet(c) for size in range(len(below) + 1) for c in itertools.combinations(below, size)]
    return tuple(sorted(sets, key=_sort_key))


def transitive_closure(x: HFSet) -> set[HFSet]:
    seen: set[HFSet] = set()
    stack = list(x)
    while stack:
        y = stack.pop()
        if y not in seen:
            seen.add(y)
            stack.extend(y)
    return seen


def format_tuple(t: tuple[HFSet, ...], numerals: bool = False) -> str:
    inner = ", ".join(format_hf(x, numerals) for x in t)
    return f"({inner},)" if len(t) == 1 else f"({inner})"


def format_tuple_set(values, numerals: bool = False) -> str:
    items = sorted(values, key=lambda t: tuple(_sort_key(x) for x in t))
    return "{" + ", ".join(format_tuple(t, numerals) for t in items) + "}"


# parsing -------------------------------------------------------------------------------

class _Reader:
    def __init__(self, text: str, pos: int = 0):
        self.text = text
        self.pos = pos

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, ch: str):
        if self.peek() != ch:
            self.fail(f"expected {ch!r}")
        self.pos += 1

    def fail(self, msg: str):
        found = self.text[self.pos] if self.pos < len(self.text) else "end of input"
        raise InputSyntaxError(f"{msg}, found {found!r}", self.pos, self.text)

    def number(self) -> int:
        self.skip()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            self.fail("expected a number")
        return int(self.text[start:self.pos])

    def hfset(self) -> HFSet:
        ch = self.peek()
        if ch.isdigit():
            return von_neumann(self.number())
        if self.text.startswith("vN(", self.pos):
            self.pos += 3
            n = self.number()
            self.expect(")")
            return von_neumann(n)
        self.expect("{")
        items = []
        if self.peek() == "}":
            self.pos += 1
            return EMPTY
        while True:
            items.append(self.hfset())
            if self.peek() == "}":
                self.pos += 1
                return HFSet(items)
            self.expect(",")

    def tuple_(self) -> tuple[HFSet, ...]:
        self.expect("(")
        items = []
        if self.peek() == ")":
            self.pos += 1
            return ()
        while True:
            items.append(self.hfset())
            if self.peek() == ")":
                self.pos += 1
                return tuple(items)
            self.expect(",")
            if self.peek() == ")":
                self.pos += 1
                return tuple(items)

    def tuple_set(self) -> frozenset:
        self.expect("{")
        items = []
        if self.peek() == "}":
            self.pos += 1
            return frozenset()
        while True:
            items.append(self.tuple_())
            if self.peek() == "}":
                self.pos += 1
                return frozenset(items)
            self.expect(",")

    def done(self):
        if self.peek():
            self.fail("unexpected trailing input")


def parse_hf(text: str) -> HFSet:
    """Parse brace notation; bare integers and ``vN(n)`` denote von Neumann numerals."""
    r = _Reader(text)
    x = r.hfset()
    r.done()
    return x


def parse_tuple_set(text: str) -> frozenset:
    r = _Reader(text)
    x = r.tuple_set()
    r.done()
    return x
