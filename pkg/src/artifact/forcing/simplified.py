"""Forcing with single functions as names and index sets as conditions."""

from __future__ import annotations

from dataclasses import dataclass
from math import lcm
from typing import Callable, Iterable, Mapping

from ..errors import ContractViolation, UnboundVariable
from ..formulas.syntax import Compare, Member, Not, Num, SetLit, St, Var
from .conditions import almost_all
from .fibers import ReindexedFiber, TabularFiber
from .hfsets import HFSet, format_hf, von_neumann
from .indexsets import IncreasingMap, IndexSet
from .los import as_formula


@dataclass(frozen=True)
class SimpleName:
    """An eventually periodic function from indices to HFSets."""

    prelude: tuple
    period: tuple

    def __init__(self, prelude: Iterable[HFSet] = (), period: Iterable[HFSet] = ()):
        pre, per = tuple(prelude), tuple(period)
        if not per:
            raise ContractViolation("a name needs a nonempty period")
        object.__setattr__(self, "prelude", pre)
        object.__setattr__(self, "period", per)

    @classmethod
    def constant(cls, x: HFSet) -> "SimpleName":
        return cls((), (x,))

    @classmethod
    def from_function(cls, fn: Callable[[int], HFSet], start: int, period: int) -> "SimpleName":
        return cls([fn(i) for i in range(start)], [fn(i) for i in range(start, start + period)])

    def __call__(self, i: int) -> HFSet:
        if i < len(self.prelude):
            return self.prelude[i]
        return self.period[(i - len(self.prelude)) % len(self.period)]

    @property
    def pattern(self) -> tuple[int, int]:
        return len(self.prelude), len(self.period)

    def __str__(self) -> str:
        show = lambda xs: ", ".join(format_hf(x) for x in xs)
        return f"prelude=[{show(self.prelude)}] period=[{show(self.period)}]"


def pullback(f: SimpleName, gamma: IncreasingMap) -> SimpleName:
    """``f o gamma`` (with ``gamma`` sending indices off its domain to 0)."""
    as_fiber = TabularFiber(1, [frozenset({(x,)}) for x in f.prelude], [frozenset({(x,)}) for x in f.period])
    start, period = ReindexedFiber(as_fiber, gamma).pattern()
    return SimpleName.from_function(lambda i: f(gamma(i)), start, period)


def _name(t, names: Mapping[str, SimpleName]) -> SimpleName:
    if isinstance(t, Var):
        if t.name not in names:
            raise UnboundVariable(f"no name called {t.name}")
        return names[t.name]
    if isinstance(t, Num):
        return SimpleName.constant(von_neumann(t.value))
    if isinstance(t, SetLit):
        return SimpleName.constant(HFSet(_name(x, {}).period[0] for x in t.elements))
    raise ContractViolation("simple names are variables or set constants")


def _joint(p: IndexSet, fs) -> tuple[int, int]:
    return max(f.pattern[0] for f in fs), lcm(*(f.pattern[1] for f in fs))


def simplified_forces(p: IndexSet, phi, names: Mapping[str, SimpleName]) -> bool:
    """``p`` forces an atomic formula (or a negated one) about simple names."""
    phi = as_formula(phi)
    p.require_unbounded()
    if isinstance(phi, Not):
        inner = phi.arg
        if isinstance(inner, St):
            raise ContractViolation("negated st has no almost-all reading")
        test = _atomic_test(inner, names)
        fs = test[1]
        return almost_all(p, _joint(p, fs), lambda i: not test[0](i))
    if isinstance(phi, St):
        f = _name(phi.term, names)
        start, period = _joint(p, [f])
        start = max(start, p.start)
        seen = {f(i) for i in range(start, start + lcm(period, p.cycle)) if i in p}
        return len(seen) == 1
    pred, fs = _atomic_test(phi, names)
    return almost_all(p, _joint(p, fs), pred)


def _atomic_test(phi, names):
    if isinstance(phi, Compare) and phi.op in ("=", "!="):
        f1, f2 = _name(phi.left, names), _name(phi.right, names)
        if phi.op == "=":
            return (lambda i: f1(i) == f2(i)), [f1, f2]
        return (lambda i: f1(i) != f2(i)), [f1, f2]
    if isinstance(phi, Member):
        f1, f2 = _name(phi.left, names), _name(phi.right, names)
        return (lambda i: f1(i) in f2(i)), [f1, f2]
    raise ContractViolation("simplified forcing handles =, in and st atoms")
