"""Fibers: functions from indices to nonempty finite sets of k-tuples of HFSets.

Every fiber reports a *pattern* ``(start, period)``: from ``start`` on, any
test whose constants have rank at most ``rank_bound`` behaves periodically in
the index with the given period.  Tabular fibers are literally eventually
periodic.  Generative fibers built from von Neumann terms ``vN(i + c)`` are
not, but comparisons between such terms and small constants stop changing
once ``i`` exceeds the constants' ranks plus the term offsets and depth, so
they report period 1 after that threshold.  Derived fibers combine the
patterns of their parts.  A fiber given as an arbitrary Python callable has
no pattern unless the caller supplies one.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import lcm
from typing import Callable, Iterable, Sequence

from ..errors import ContractViolation, IndexOutOfRange, InputSyntaxError, Undecidable
from .hfsets import EMPTY, HFSet, _Reader, format_hf, format_tuple_set, rank, von_neumann
from .indexsets import IncreasingMap, IndexSet

Tuple = tuple  # tuple[HFSet, ...]
Value = frozenset  # frozenset[tuple[HFSet, ...]]


def empty_tuple(k: int) -> tuple:
    return (EMPTY,) * k


def default_value(k: int) -> frozenset:
    """The filler value ``{<0,...,0>}`` used off the index set of a condition."""
    return frozenset({empty_tuple(k)})


def combine_patterns(*patterns: tuple[int, int]) -> tuple[int, int]:
    return max(p[0] for p in patterns), lcm(*(p[1] for p in patterns))


def value_rank(value: frozenset) -> int:
    return max((rank(x) for t in value for x in t), default=0)


class Fiber:
    """Base class; subclasses define ``rank``, ``value`` and ``pattern``."""

    rank: int

    def value(self, i: int) -> frozenset:
        raise NotImplementedError

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        raise NotImplementedError

    def constant_rank(self) -> int:
        """Largest rank of an HFSet written into the fiber's description."""
        return 0

    def has_growth(self) -> bool:
        """True when some column can grow with the index (a ``vN(i)`` term)."""
        return False

    def __call__(self, i: int) -> frozenset:
        return self.value(i)

    def column(self, i: int, n: int) -> set[HFSet]:
        return {t[n] for t in self.value(i)}

    def window(self, rank_bound: int = 0) -> range:
        start, period = self.pattern(rank_bound)
        return range(start + period)


def _check_value(value, k: int, where: str) -> frozenset:
    value = frozenset(tuple(t) for t in value)
    if not value:
        raise ContractViolation(f"fiber value at {where} is empty")
    for t in value:
        if len(t) != k:
            raise ContractViolation(f"tuple {t} at {where} does not have length {k}")
        if not all(isinstance(x, HFSet) for x in t):
            raise ContractViolation(f"tuple at {where} holds a non-HFSet entry")
    return value


def _minimal_values(prelude: tuple, period: tuple) -> tuple[tuple, tuple]:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period == period[:d] * (n // d):
            period = period[:d]
            break
    while prelude and prelude[-1] == period[-1]:
        prelude = prelude[:-1]
        period = period[-1:] + period[:-1]
    return prelude, period


@dataclass(frozen=True, eq=True)
class TabularFiber(Fiber):
    rank: int
    prelude: tuple
    period: tuple

    def __init__(self, rank: int, prelude: Iterable = (), period: Iterable | None = None):
        if rank < 0:
            raise ContractViolation("fiber rank must be nonnegative")
        pre = tuple(_check_value(v, rank, f"prelude[{j}]") for j, v in enumerate(prelude))
        per = tuple(_check_value(v, rank, f"period[{j}]") for j, v in enumerate(period or [default_value(rank)]))
        pre, per = _minimal_values(pre, per)
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "prelude", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def constant(cls, value, rank: int | None = None) -> "TabularFiber":
        value = frozenset(tuple(t) for t in value)
        k = rank if rank is not None else len(next(iter(value)))
        return cls(k, (), [value])

    @classmethod
    def from_function(cls, rank: int, fn: Callable[[int], frozenset], start: int, period: int) -> "TabularFiber":
        return cls(rank, [fn(i) for i in range(start)], [fn(i) for i in range(start, start + period)])

    def value(self, i: int) -> frozenset:
        if i < len(self.prelude):
            return self.prelude[i]
        return self.period[(i - len(self.prelude)) % len(self.period)]

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        return len(self.prelude), len(self.period)

    def constant_rank(self) -> int:
        return max(value_rank(v) for v in self.prelude + self.period)


def one_point_one() -> TabularFiber:
    """The rank-0 unit: every index carries the single empty tuple."""
    return TabularFiber(0, (), [frozenset({()})])


def tabular(fiber: Fiber, rank_bound: int = 0) -> TabularFiber:
    """Materialise an eventually periodic fiber (raises for generative ones)."""
    if isinstance(fiber, TabularFiber):
        return fiber
    if fiber.has_growth():
        raise ContractViolation("generative fibers have no tabular form")
    start, period = fiber.pattern(rank_bound)
    return TabularFiber.from_function(fiber.rank, fiber.value, start, period)


# generative rule terms ------------------------------------------------------------------

@dataclass(frozen=True)
class RConst:
    value: HFSet


@dataclass(frozen=True)
class RIndex:
    """``vN(i + offset)``, clamped at 0 for negative arguments."""

    offset: int = 0


@dataclass(frozen=True)
class RSet:
    """``{t1, ..., tn}``: singletons and pairs (and longer literals)."""

    items: tuple


@dataclass(frozen=True)
class RUnion:
    left: object
    right: object


def eval_rule(t, i: int) -> HFSet:
    if isinstance(t, RConst):
        return t.value
    if isinstance(t, RIndex):
        return von_neumann(max(0, i + t.offset))
    if isinstance(t, RSet):
        return HFSet(eval_rule(x, i) for x in t.items)
    if isinstance(t, RUnion):
        return HFSet(eval_rule(t.left, i) | eval_rule(t.right, i))
    raise TypeError(t)


def _rule_stats(t) -> tuple[int, int, int, bool]:
    """(depth, max |offset|, max constant rank, mentions the index)."""
    if isinstance(t, RConst):
        return 0, 0, rank(t.value), False
    if isinstance(t, RIndex):
        return 0, abs(t.offset), 0, True
    parts = t.items if isinstance(t, RSet) else (t.left, t.right)
    stats = [_rule_stats(x) for x in parts] or [(0, 0, 0, False)]
    return (
        1 + max(s[0] for s in stats),
        max(s[1] for s in stats),
        max(s[2] for s in stats),
        any(s[3] for s in stats),
    )


def format_rule(t) -> str:
    if isinstance(t, RConst):
        return format_hf(t.value)
    if isinstance(t, RIndex):
        if t.offset == 0:
            return "vN(i)"
        return f"vN(i{'+' if t.offset > 0 else '-'}{abs(t.offset)})"
    if isinstance(t, RSet):
        return "{" + ", ".join(format_rule(x) for x in t.items) + "}"
    return f"union({format_rule(t.left)}, {format_rule(t.right)})"


@dataclass(frozen=True)
class GenerativeFiber(Fiber):
    """Value at ``i`` is ``{(row[0](i), ..., row[k-1](i)) for row in rows}``."""

    rank: int
    rows: tuple

    def __init__(self, rank: int, rows: Sequence[Sequence]):
        rows = tuple(tuple(r) for r in rows)
        if not rows:
            raise ContractViolation("a generative fiber needs at least one row")
        if any(len(r) != rank for r in rows):
            raise ContractViolation(f"every row must have {rank} terms")
        object.__setattr__(self, "rank", rank)
        object.__setattr__(self, "rows", rows)

    def value(self, i: int) -> frozenset:
        return frozenset(tuple(eval_rule(t, i) for t in row) for row in self.rows)

    def _stats(self):
        stats = [_rule_stats(t) for row in self.rows for t in row] or [(0, 0, 0, False)]
        return (
            max(s[0] for s in stats),
            max(s[1] for s in stats),
            max(s[2] for s in stats),
            any(s[3] for s in stats),
        )

    def has_growth(self) -> bool:
        return self._stats()[3]

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        depth, offset, const_rank, growing = self._stats()
        if not growing:
            return 0, 1
        return max(rank_bound, const_rank) + offset + depth + 2, 1

    def constant_rank(self) -> int:
        return self._stats()[2]


@dataclass(frozen=True, eq=False)
class OpaqueFiber(Fiber):
    """A fiber given by a Python callable; almost-all checks need a caller certificate."""

    rank: int
    fn: Callable[[int], frozenset]
    horizon: tuple[int, int] | None = None

    def value(self, i: int) -> frozenset:
        return _check_value(self.fn(i), self.rank, f"index {i}")

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        if self.horizon is None:
            raise Undecidable("this fiber has no periodicity certificate; supply a horizon")
        return self.horizon

    def has_growth(self) -> bool:
        return True


# derived fibers --------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FilteredFiber(Fiber):
    """``{t in base(i) : test(t)}`` on ``keep``; the filler value elsewhere."""

    base: Fiber
    keep: IndexSet
    test: Callable[[tuple], bool]
    test_rank: int = 0
    label: str = "filter"

    @property
    def rank(self) -> int:
        return self.base.rank

    def value(self, i: int) -> frozenset:
        if i not in self.keep:
            return default_value(self.rank)
        kept = frozenset(t for t in self.base.value(i) if self.test(t))
        if not kept:
            raise ContractViolation(f"{self.label} leaves index {i} empty")
        return kept

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        return combine_patterns(
            self.base.pattern(max(rank_bound, self.test_rank)), (self.keep.start, self.keep.cycle)
        )

    def constant_rank(self) -> int:
        return max(self.base.constant_rank(), self.test_rank)

    def has_growth(self) -> bool:
        return self.base.has_growth()


@dataclass(frozen=True, eq=False)
class ExtendedFiber(Fiber):
    """Append one column: a constant ``z``, or ``vN(i)`` when ``z`` is None."""

    base: Fiber
    z: HFSet | None = None

    @property
    def rank(self) -> int:
        return self.base.rank + 1

    def extra(self, i: int) -> HFSet:
        return self.z if self.z is not None else von_neumann(i)

    def value(self, i: int) -> frozenset:
        x = self.extra(i)
        return frozenset(t + (x,) for t in self.base.value(i))

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        if self.z is not None:
            return self.base.pattern(max(rank_bound, rank(self.z)))
        inner = self.base.pattern(rank_bound)
        return combine_patterns(inner, (max(rank_bound, self.base.constant_rank()) + 2, 1))

    def constant_rank(self) -> int:
        return max(self.base.constant_rank(), rank(self.z) if self.z is not None else 0)

    def has_growth(self) -> bool:
        return self.z is None or self.base.has_growth()


@dataclass(frozen=True, eq=False)
class ProjectedFiber(Fiber):
    """Coordinates ``sigma`` of every tuple, in that order."""

    base: Fiber
    sigma: tuple

    @property
    def rank(self) -> int:
        return len(self.sigma)

    def value(self, i: int) -> frozenset:
        return frozenset(tuple(t[j] for j in self.sigma) for t in self.base.value(i))

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        return self.base.pattern(rank_bound)

    def constant_rank(self) -> int:
        return self.base.constant_rank()

    def has_growth(self) -> bool:
        return self.base.has_growth()


@dataclass(frozen=True, eq=False)
class ReindexedFiber(Fiber):
    """``base o gamma`` where ``gamma`` is an increasing map (0 off its domain)."""

    base: Fiber
    gamma: IncreasingMap

    @property
    def rank(self) -> int:
        return self.base.rank

    def value(self, i: int) -> frozenset:
        return self.base.value(self.gamma(i))

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        dom, tgt = self.gamma.domain, self.gamma.target
        q_start, q_period = self.base.pattern(rank_bound)
        # positions from which the target elements sit in the periodic part of both
        pos = max(tgt.position(max(q_start, tgt.start)), dom.position(dom.start))
        start = max(dom.start, dom.nth(pos))
        count, _ = tgt.density()
        return start, dom.cycle * count * q_period

    def constant_rank(self) -> int:
        return self.base.constant_rank()

    def has_growth(self) -> bool:
        return self.base.has_growth()


@dataclass(frozen=True, eq=False)
class ProductFiber(Fiber):
    """Concatenated tuples: ``{x + y : x in left(i), y in right(i)}``."""

    left: Fiber
    right: Fiber

    @property
    def rank(self) -> int:
        return self.left.rank + self.right.rank

    def value(self, i: int) -> frozenset:
        rights = self.right.value(i)
        return frozenset(x + y for x in self.left.value(i) for y in rights)

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        return combine_patterns(self.left.pattern(rank_bound), self.right.pattern(rank_bound))

    def constant_rank(self) -> int:
        return max(self.left.constant_rank(), self.right.constant_rank())

    def has_growth(self) -> bool:
        return self.left.has_growth() or self.right.has_growth()


@dataclass(frozen=True, eq=False)
class PiecewiseFiber(Fiber):
    """``pieces[j]`` on ``[cuts[j], cuts[j+1])`` and ``tail`` from ``cuts[-1]`` on."""

    cuts: tuple
    pieces: tuple
    tail: Fiber

    @property
    def rank(self) -> int:
        return self.tail.rank

    def value(self, i: int) -> frozenset:
        for j, piece in enumerate(self.pieces):
            if self.cuts[j] <= i < self.cuts[j + 1]:
                return piece.value(i)
        if i >= self.cuts[-1]:
            return self.tail.value(i)
        return default_value(self.rank)

    def pattern(self, rank_bound: int = 0) -> tuple[int, int]:
        return combine_patterns(self.tail.pattern(rank_bound), (self.cuts[-1], 1))

    def constant_rank(self) -> int:
        return max([self.tail.constant_rank()] + [p.constant_rank() for p in self.pieces])

    def has_growth(self) -> bool:
        return self.tail.has_growth()


# transforms -------------------------------------------------------------------------------

def restrict_rank(q: Fiber, ell: int) -> Fiber:
    """Keep the first ``ell`` coordinates; the identity when ``ell`` equals the rank."""
    if not 0 <= ell <= q.rank:
        raise IndexOutOfRange(f"cannot restrict a rank-{q.rank} fiber to {ell} coordinates")
    if ell == q.rank:
        return q
    return ProjectedFiber(q, tuple(range(ell)))


def project(q: Fiber, sigma: Sequence[int]) -> Fiber:
    sigma = tuple(sigma)
    if len(set(sigma)) != len(sigma):
        raise IndexOutOfRange("projection indices must be distinct")
    bad = [j for j in sigma if not 0 <= j < q.rank]
    if bad:
        raise IndexOutOfRange(f"projection index {bad[0]} is outside rank {q.rank}")
    return ProjectedFiber(q, sigma)


def reindex(q: Fiber, gamma: IncreasingMap) -> Fiber:
    return ReindexedFiber(q, gamma)


def fiber_transforms(
    q: Fiber,
    restrict_rank_to: int | None = None,
    project_to: Sequence[int] | None = None,
    reindex_by: IncreasingMap | None = None,
) -> Fiber:
    """Apply restriction, projection and reindexing, in that order, to ``q``."""
    if restrict_rank_to is not None:
        q = restrict_rank(q, restrict_rank_to)
    if project_to is not None:
        q = project(q, project_to)
    if reindex_by is not None:
        q = reindex(q, reindex_by)
    return q


def amalgamate(q: Fiber, gamma: IncreasingMap) -> Fiber:
    """Rank ``2k`` fiber pairing every tuple at ``i`` with every tuple at ``gamma(i)``."""
    return ProductFiber(q, ReindexedFiber(q, gamma))


def agree_on(p: IndexSet, q1: Fiber, q2: Fiber, rank_bound: int = 0) -> bool:
    """``q1(i) == q2(i)`` for every ``i`` in ``p`` (exactly, not almost all)."""
    start, period = combine_patterns(q1.pattern(rank_bound), q2.pattern(rank_bound), (p.start, p.cycle))
    return all(q1.value(i) == q2.value(i) for i in range(start + period) if i in p)


# text format ------------------------------------------------------------------------------

def format_fiber(q: Fiber) -> str:
    if isinstance(q, GenerativeFiber):
        rows = ", ".join("(" + ", ".join(format_rule(t) for t in row) + (",)" if q.rank == 1 else ")") for row in q.rows)
        return f"rank={q.rank} rule={{{rows}}}"
    t = tabular(q)
    pre = ", ".join(format_tuple_set(v) for v in t.prelude)
    per = ", ".join(format_tuple_set(v) for v in t.period)
    return f"rank={t.rank} prelude=[{pre}] period=[{per}]"


def describe_fiber(q: Fiber, preview: int = 6) -> str:
    """``format_fiber`` when a finite text form exists, else the first few values."""
    if isinstance(q, GenerativeFiber) or not q.has_growth():
        return format_fiber(q)
    shown = ", ".join(format_tuple_set(q.value(i)) for i in range(preview))
    return f"rank={q.rank} values=[{shown}, ...]"


class _RuleReader(_Reader):
    def rule_term(self):
        ch = self.peek()
        if self.text.startswith("vN(i", self.pos):
            self.pos += 4
            offset = 0
            sign = self.peek()
            if sign in "+-":
                self.pos += 1
                offset = self.number() * (1 if sign == "+" else -1)
            self.expect(")")
            return RIndex(offset)
        if self.text.startswith("union(", self.pos):
            self.pos += 6
            left = self.rule_term()
            self.expect(",")
            right = self.rule_term()
            self.expect(")")
            return RUnion(left, right)
        if ch == "{":
            save = self.pos
            try:
                return RConst(self.hfset())
            except InputSyntaxError:
                self.pos = save
            self.expect("{")
            items = []
            if self.peek() == "}":
                self.pos += 1
                return RConst(EMPTY)
            while True:
                items.append(self.rule_term())
                if self.peek() == "}":
                    self.pos += 1
                    return RSet(tuple(items))
                self.expect(",")
        return RConst(self.hfset())

    def rule_row(self) -> tuple:
        self.expect("(")
        items = []
        if self.peek() == ")":
            self.pos += 1
            return ()
        while True:
            items.append(self.rule_term())
            if self.peek() == ")":
                self.pos += 1
                return tuple(items)
            self.expect(",")
            if self.peek() == ")":
                self.pos += 1
                return tuple(items)

    def rule_rows(self) -> list:
        self.expect("{")
        rows = []
        while True:
            rows.append(self.rule_row())
            if self.peek() == "}":
                self.pos += 1
                return rows
            self.expect(",")

    def value_list(self) -> list:
        self.expect("[")
        values = []
        if self.peek() == "]":
            self.pos += 1
            return values
        while True:
            values.append(self.tuple_set())
            if self.peek() == "]":
                self.pos += 1
                return values
            self.expect(",")


def parse_fiber(text: str) -> Fiber:
    """Parse ``rank=2 prelude=[...] period=[...]`` or ``rank=1 rule={(vN(i)), ...}``."""
    r = _RuleReader(text)
    fields: dict[str, object] = {}
    while r.peek():
        start = r.pos
        while r.pos < len(text) and (text[r.pos].isalnum() or text[r.pos] == "_"):
            r.pos += 1
        key = text[start:r.pos]
        if not key:
            r.fail("expected a field name")
        r.expect("=")
        if key == "rank":
            fields["rank"] = r.number()
        elif key in ("prelude", "period"):
            fields[key] = r.value_list()
        elif key == "rule":
            fields["rule"] = r.rule_rows()
        else:
            raise InputSyntaxError(f"unknown fiber field {key!r}", start, text)
    k = fields.get("rank")
    if k is None:
        raise InputSyntaxError("fiber needs a rank", 0, text)
    try:
        if "rule" in fields:
            return GenerativeFiber(k, fields["rule"])
        if "prelude" not in fields and "period" not in fields:
            return TabularFiber(k, (), [default_value(k)])
        return TabularFiber(k, fields.get("prelude", []), fields.get("period") or [default_value(k)])
    except ContractViolation as exc:
        raise InputSyntaxError(str(exc), 0, text) from None
