"""Thick and thin families of finite subsets of the natural numbers.

A family is a Boolean combination of ``contains(x)``, ``atleast(c)`` and
``atmost(c)``.  Whether a finite set belongs to it depends only on which
designated elements (the ``x`` of the ``contains`` atoms) it holds and on its
size.  Any two sets agreeing on those data are related by a permutation of
the naturals fixing the designated elements, so every quantifier over finite
sets reduces to a quantifier over (designated part, number of other
elements).  Beyond the largest cardinality constant, membership no longer
depends on the size, which bounds every search.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

from ..errors import ContractViolation, InputSyntaxError, ThicknessPrecondition


class FinFamily:
    def holds_shape(self, marked: frozenset, size: int) -> bool:
        """Membership of a set with designated part ``marked`` and ``size`` elements."""
        raise NotImplementedError

    def designated(self) -> frozenset:
        return frozenset()

    def card_bound(self) -> int:
        """Largest cardinality constant mentioned."""
        return 0

    def __contains__(self, a) -> bool:
        a = frozenset(a)
        return self.holds_shape(a & self.designated(), len(a))

    def __and__(self, other: "FinFamily") -> "FinFamily":
        return FamAnd(self, other)

    def __or__(self, other: "FinFamily") -> "FinFamily":
        return FamOr(self, other)

    def __invert__(self) -> "FinFamily":
        return FamNot(self)

    def __sub__(self, other: "FinFamily") -> "FinFamily":
        return FamAnd(self, FamNot(other))

    def __str__(self) -> str:
        return format_family(self)


@dataclass(frozen=True)
class Contains(FinFamily):
    x: int

    def holds_shape(self, marked, size):
        return self.x in marked

    def designated(self):
        return frozenset({self.x})


@dataclass(frozen=True)
class CardAtLeast(FinFamily):
    c: int

    def holds_shape(self, marked, size):
        return size >= self.c

    def card_bound(self):
        return self.c


@dataclass(frozen=True)
class CardAtMost(FinFamily):
    c: int

    def holds_shape(self, marked, size):
        return size <= self.c

    def card_bound(self):
        return self.c


@dataclass(frozen=True)
class AllSets(FinFamily):
    value: bool = True

    def holds_shape(self, marked, size):
        return self.value


@dataclass(frozen=True)
class FamNot(FinFamily):
    arg: FinFamily

    def holds_shape(self, marked, size):
        return not self.arg.holds_shape(marked, size)

    def designated(self):
        return self.arg.designated()

    def card_bound(self):
        return self.arg.card_bound()


@dataclass(frozen=True)
class _Binary(FinFamily):
    left: FinFamily
    right: FinFamily

    def designated(self):
        return self.left.designated() | self.right.designated()

    def card_bound(self):
        return max(self.left.card_bound(), self.right.card_bound())


class FamAnd(_Binary):
    def holds_shape(self, marked, size):
        return self.left.holds_shape(marked, size) and self.right.holds_shape(marked, size)


class FamOr(_Binary):
    def holds_shape(self, marked, size):
        return self.left.holds_shape(marked, size) or self.right.holds_shape(marked, size)


def contains_all(xs) -> FinFamily:
    fam: FinFamily = AllSets()
    for x in xs:
        fam = Contains(x) if isinstance(fam, AllSets) else fam & Contains(x)
    return fam


# shapes ----------------------------------------------------------------------------------

def _subsets(s: frozenset):
    items = sorted(s)
    for n in range(len(items) + 1):
        for combo in itertools.combinations(items, n):
            yield frozenset(combo)


def smallest_superset(fam: FinFamily, marked: frozenset, others: int, domain: frozenset | None = None) -> int | None:
    """Least size of a member containing a set of shape (``marked``, ``others``), or None."""
    domain = fam.designated() if domain is None else domain
    best = None
    ceiling = fam.card_bound() + 1
    for extra in _subsets(domain - marked):
        t = marked | extra
        for g in range(others, max(others, ceiling) + 1):
            size = len(t) + g
            if best is not None and size >= best:
                break
            if fam.holds_shape(t & fam.designated(), size):
                best = size
                break
    return best


def concrete(marked: frozenset, others: int, domain: frozenset) -> frozenset:
    """A representative finite set with the given shape."""
    fresh = (i for i in itertools.count() if i not in domain)
    return frozenset(marked) | frozenset(itertools.islice(fresh, others))


@dataclass(frozen=True)
class NuRow:
    m: int
    nu: int | None
    witness: frozenset | None  # a set with no superset in the family when nu is None

    @property
    def thick(self) -> bool:
        return self.nu is not None


@dataclass
class ThicknessReport:
    family: FinFamily
    rows: list = field(default_factory=list)

    def nu(self, m: int) -> int | None:
        return self.rows[m].nu

    def thick_up_to(self, m: int | None = None) -> bool:
        rows = self.rows if m is None else self.rows[: m + 1]
        return all(r.thick for r in rows)

    def first_thin(self) -> NuRow | None:
        return next((r for r in self.rows if not r.thick), None)


def thickness_nu(fam: FinFamily, m_max: int) -> ThicknessReport:
    """For each ``m <= m_max``, the least ``n`` such that every set of size at most ``m``
    lies inside a member of size at most ``n``, or a set lying inside no member."""
    domain = fam.designated()
    report = ThicknessReport(fam)
    for m in range(m_max + 1):
        worst, witness = 0, None
        for marked in _subsets(domain):
            if len(marked) > m:
                continue
            for others in range(m - len(marked) + 1):
                size = smallest_superset(fam, marked, others, domain)
                if size is None:
                    witness = concrete(marked, others, domain)
                    break
                worst = max(worst, size)
            if witness is not None:
                break
        report.rows.append(NuRow(m, None if witness is not None else worst, witness))
    return report


def family_is_empty(fam: FinFamily) -> bool:
    return smallest_superset(fam, frozenset(), 0) is None


def includes(big: FinFamily, small: FinFamily) -> bool:
    return family_is_empty(small - big)


def max_member_size(fam: FinFamily) -> int | None:
    """Largest size of a member, None when members are arbitrarily large, -1 when empty."""
    if family_is_empty(fam):
        return -1
    if not family_is_empty(fam & CardAtLeast(fam.card_bound() + len(fam.designated()) + 1)):
        return None
    ceiling = fam.card_bound() + len(fam.designated())
    return max(n for n in range(ceiling + 1) if not family_is_empty(fam & CardAtLeast(n)))


# diagonal union of a chain ---------------------------------------------------------------

@dataclass
class DiagonalReport:
    composite: FinFamily
    guards: list  # nu_{p_n}(n) for the members below the last
    thickness: ThicknessReport
    bounds: dict  # n -> k with every member of (composite minus p_n) of size <= k
    checked: dict  # n -> largest member size actually found in composite minus p_n

    @property
    def thick(self) -> bool:
        return self.thickness.thick_up_to()


def diagonal_thick(chain: list, m_check: int) -> DiagonalReport:
    """Union over ``n`` of the members of ``p_n`` no larger than ``nu_{p_n}(n)``.

    The last family of the chain stands for every later one, so it enters
    without a guard.  The report checks thickness up to ``m_check`` and the
    size bound on each difference with an earlier member of the chain.
    """
    if not chain:
        raise ContractViolation("the chain must have at least one family")
    for a, b in zip(chain, chain[1:]):
        if not includes(a, b):
            raise ContractViolation(f"{format_family(b)} is not contained in {format_family(a)}")
    need = max(len(chain) - 1, m_check)
    guards = []
    for n, fam in enumerate(chain):
        rep = thickness_nu(fam, need)
        if not rep.thick_up_to():
            bad = rep.first_thin()
            raise ThicknessPrecondition(
                f"chain member {n} ({format_family(fam)}) is thin at m = {bad.m}, witness {sorted(bad.witness)}"
            )
        if n < len(chain) - 1:
            guards.append(rep.nu(n))
    composite = chain[-1]
    for fam, guard in reversed(list(zip(chain, guards))):
        composite = (fam & CardAtMost(guard)) | composite
    bounds, checked = {}, {}
    for n in range(1, len(chain)):
        bounds[n] = max(guards[:n])
        checked[n] = max_member_size(composite - chain[n])
        if checked[n] is None or checked[n] > bounds[n]:
            raise ContractViolation(f"difference with member {n} exceeds the bound {bounds[n]}")
    return DiagonalReport(composite, guards, thickness_nu(composite, m_check), bounds, checked)


# text format -----------------------------------------------------------------------------

def format_family(fam: FinFamily, ctx: int = 0) -> str:
    if isinstance(fam, Contains):
        return f"contains({fam.x})"
    if isinstance(fam, CardAtLeast):
        return f"atleast({fam.c})"
    if isinstance(fam, CardAtMost):
        return f"atmost({fam.c})"
    if isinstance(fam, AllSets):
        return "all" if fam.value else "none"
    if isinstance(fam, FamNot):
        return "!" + format_family(fam.arg, 3)
    if isinstance(fam, FamAnd):
        text = f"{format_family(fam.left, 2)} & {format_family(fam.right, 2)}"
        return f"({text})" if ctx > 2 else text
    if isinstance(fam, FamOr):
        text = f"{format_family(fam.left, 1)} | {format_family(fam.right, 1)}"
        return f"({text})" if ctx > 1 else text
    raise TypeError(fam)


_TOKEN = re.compile(r"\s*(?:(contains|atleast|atmost)\(\s*(\d+)\s*\)|(all|none)\b|([&|!()]))")


def parse_family(text: str) -> FinFamily:
    """Parse ``contains(5) & !atmost(3) | all``; ``!`` binds tightest, then ``&``, then ``|``."""
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise InputSyntaxError("expected a family atom or connective", len(text) - len(text[pos:].lstrip()), text)
        tokens.append((m, m.start(0) + len(m.group(0)) - len(m.group(0).lstrip())))
        pos = m.end()
    k = 0

    def peek():
        return tokens[k][0].group(4) if k < len(tokens) else None

    def fail(msg):
        where = tokens[k][1] if k < len(tokens) else len(text)
        raise InputSyntaxError(msg, where, text)

    def disj():
        nonlocal k
        left = conj()
        while peek() == "|":
            k += 1
            left = FamOr(left, conj())
        return left

    def conj():
        nonlocal k
        left = unary()
        while peek() == "&":
            k += 1
            left = FamAnd(left, unary())
        return left

    def unary():
        nonlocal k
        if k >= len(tokens):
            fail("unexpected end of input")
        m = tokens[k][0]
        if m.group(4) == "!":
            k += 1
            return FamNot(unary())
        if m.group(4) == "(":
            k += 1
            inner = disj()
            if peek() != ")":
                fail("expected ')'")
            k += 1
            return inner
        if m.group(1):
            k += 1
            n = int(m.group(2))
            return {"contains": Contains, "atleast": CardAtLeast, "atmost": CardAtMost}[m.group(1)](n)
        if m.group(3):
            k += 1
            return AllSets(m.group(3) == "all")
        fail("expected a family atom")

    fam = disj()
    if k != len(tokens):
        fail("unexpected trailing input")
    return fam
