"""Finite-grid evaluation of formulas, used to hunt for counterexamples.

Each quantifier ranges over the grid for its kind: st quantifiers over the
standard grid, in-quantifiers over the infinitesimal grid plus 0, plain
quantifiers over the plain grid, bounded quantifiers over 1..bound. Agreement
on grids is evidence only; a disagreement refutes an equivalence.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

from ..errors import UninterpretedSymbol
from ..hyper import EPS, LCNum, compare, from_rational, monomial
from .syntax import (
    And,
    App,
    Arith,
    Compare,
    Formula,
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
    Term,
    Truth,
    Var,
)


@dataclass(frozen=True)
class SampleGrids:
    standard: tuple[Fraction, ...]
    infinitesimal: tuple[LCNum, ...]
    plain: tuple[LCNum, ...]
    posint: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "standard", tuple(Fraction(q) for q in self.standard))
        object.__setattr__(self, "infinitesimal", tuple(LCNum.coerce(x) for x in self.infinitesimal))
        object.__setattr__(self, "plain", tuple(LCNum.coerce(x) for x in self.plain))

    def size(self) -> int:
        return len(self.plain)


@dataclass
class Interpretation:
    predicates: Mapping[str, Callable[..., bool]] = field(default_factory=dict)
    functions: Mapping[str, Callable[..., LCNum]] = field(default_factory=dict)
    constants: Mapping[str, object] = field(default_factory=dict)


def _positive_integers(values) -> list[int]:
    return [int(q) for q in values if q.denominator == 1 and q > 0]


class _Evaluator:
    def __init__(self, grids: SampleGrids, interp: Interpretation):
        self.grids = grids
        self.interp = interp
        self.standard_values = [from_rational(q) for q in grids.standard]
        self.standard_posints = [from_rational(n) for n in _positive_integers(grids.standard)]
        extra = grids.posint if grids.posint is not None else _positive_integers(grids.standard)
        self.plain_posints = [from_rational(n) for n in extra]
        self.in_values = [from_rational(0)] + list(grids.infinitesimal)
        self.standard_set = set(grids.standard)

    def domain(self, q: Quant, env) -> list[LCNum]:
        if q.bound is not None:
            top = self.term(q.bound, env)
            if not top.is_standard() or top.to_rational().denominator != 1:
                raise ValueError("bounded quantifier needs an integer bound")
            return [from_rational(i) for i in range(1, int(top.to_rational()) + 1)]
        if q.kind in ("Ast", "Est"):
            return self.standard_posints if q.sort == "posint" else self.standard_values
        if q.kind in ("Ain", "Ein"):
            return self.in_values
        return self.plain_posints if q.sort == "posint" else list(self.grids.plain)

    def term(self, t: Term, env) -> LCNum:
        if isinstance(t, Var):
            if t.name in env:
                return env[t.name]
            if t.name in self.interp.constants:
                return LCNum.coerce(self.interp.constants[t.name])
            raise UninterpretedSymbol(f"no value for {t.name!r}")
        if isinstance(t, Num):
            return from_rational(t.value)
        if isinstance(t, Minus):
            return -self.term(t.arg, env)
        if isinstance(t, Arith):
            a, b = self.term(t.left, env), self.term(t.right, env)
            return {"+": a.__add__, "-": a.__sub__, "*": a.__mul__, "/": a.__truediv__}[t.op](b)
        if isinstance(t, App):
            fn = self.interp.functions.get(t.fn)
            if fn is None:
                raise UninterpretedSymbol(f"function {t.fn!r} is not interpreted")
            return LCNum.coerce(fn(*(self.term(a, env) for a in t.args)))
        if isinstance(t, SetLit):
            raise UninterpretedSymbol("set literals have no numeric interpretation")
        raise TypeError(t)

    def holds(self, f: Formula, env) -> bool:
        if isinstance(f, Truth):
            return f.value
        if isinstance(f, Compare):
            c = compare(self.term(f.left, env), self.term(f.right, env))
            return {"=": c == 0, "!=": c != 0, "<": c < 0, "<=": c <= 0, ">": c > 0, ">=": c >= 0}[f.op]
        if isinstance(f, Mag):
            value = abs(self.term(f.term, env))
            denom = self.term(f.denom, env)
            return compare(value * denom, from_rational(1)) < 0
        if isinstance(f, Member):
            rel = self.interp.predicates.get("in")
            if rel is None:
                raise UninterpretedSymbol("membership is not interpreted")
            return bool(rel(self.term(f.left, env), self.term(f.right, env)))
        if isinstance(f, St):
            v = self.term(f.term, env)
            return v.is_standard() and v.to_rational() in self.standard_set
        if isinstance(f, Pred):
            rel = self.interp.predicates.get(f.name)
            if rel is None:
                raise UninterpretedSymbol(f"predicate {f.name!r} is not interpreted")
            return bool(rel(*(self.term(a, env) for a in f.args)))
        if isinstance(f, Not):
            return not self.holds(f.arg, env)
        if isinstance(f, And):
            return self.holds(f.left, env) and self.holds(f.right, env)
        if isinstance(f, Or):
            return self.holds(f.left, env) or self.holds(f.right, env)
        if isinstance(f, Implies):
            return (not self.holds(f.left, env)) or self.holds(f.right, env)
        if isinstance(f, Quant):
            values = self.domain(f, env)
            test = (self.holds(f.body, {**env, f.var: v}) for v in values)
            return all(test) if f.kind in ("A", "Ast", "Ain") else any(test)
        raise TypeError(f)


def sample_semantics(
    f: Formula,
    grids: SampleGrids,
    interp: Interpretation | None = None,
    env: Mapping[str, object] | None = None,
) -> bool:
    """Truth value of ``f`` when every quantifier ranges over its finite grid."""
    ev = _Evaluator(grids, interp or Interpretation())
    return ev.holds(f, {k: LCNum.coerce(v) for k, v in (env or {}).items()})


# coherent grid families ---------------------------------------------------------------

INFINITESIMAL_POOL = (EPS, -EPS, monomial(1, 2), monomial(2, 1))
LARGE_POOL = (from_rational(1), from_rational(Fraction(-3, 2)), from_rational(2))
STANDARD_POOL = (Fraction(1), Fraction(2), Fraction(3))


def is_coherent(grids: SampleGrids) -> bool:
    """Plain grid = infinitesimals + 0 + values no smaller than 1/max(standard).

    On such grids "|x| < 1/n for every standard n" picks out exactly the
    in-grid, so the finite model respects the meaning of in-quantifiers.
    """
    posints = _positive_integers(grids.standard)
    if not posints:
        return False
    cutoff = from_rational(Fraction(1, max(posints)))
    zero = from_rational(0)
    tiny = [x for x in grids.plain if compare(abs(x), cutoff) < 0]
    if set(tiny) != set(grids.infinitesimal) | {zero}:
        return False
    return all(compare(x, zero) != 0 and not x.is_exact_zero() for x in grids.infinitesimal)


def grid_configurations(max_size: int = 6) -> Iterator[SampleGrids]:
    """All coherent grids built from prefixes of the sample pools with plain size <= max_size."""
    zero = from_rational(0)
    for n_std in range(1, len(STANDARD_POOL) + 1):
        standard = STANDARD_POOL[:n_std]
        for n_inf in range(1, len(INFINITESIMAL_POOL) + 1):
            for n_large in range(0, len(LARGE_POOL) + 1):
                plain = INFINITESIMAL_POOL[:n_inf] + (zero,) + LARGE_POOL[:n_large]
                if len(plain) > max_size:
                    continue
                grids = SampleGrids(standard, INFINITESIMAL_POOL[:n_inf], plain)
                if is_coherent(grids):
                    yield grids


def configuration_count(max_size: int = 6) -> int:
    return sum(1 for _ in grid_configurations(max_size))


def default_interpretations() -> list[Interpretation]:
    """A few interpretations for the relation and function symbols used in the corpus.

    Predicates accept any arity and look at their first and last arguments,
    so one table serves every formula.
    """
    zero = from_rational(0)
    one = from_rational(1)

    def sq(x):
        return x * x

    def linear(x):
        return 3 * x + 1

    def cube(x):
        return x * x * x

    def first_last(fn):
        return lambda *args: fn(args[0], args[-1]) if args else True

    consts = {"c": 1, "x": Fraction(1, 2), "a": 0, "b": 1, "r": 1, "alpha": 0}
    interps = []
    for fn, slope, total in ((sq, 2, lambda h: one + h), (linear, 3, lambda h: one + h * h), (cube, 3, lambda h: from_rational(2) + h)):
        interps.append(
            Interpretation(
                {
                    "phi": first_last(lambda h, k: compare(abs(k), abs(h)) <= 0),
                    "P": lambda *args: compare(sum(args, zero), zero) >= 0,
                    "Q": first_last(lambda a, b: compare(a, b) != 0 or compare(a, zero) == 0),
                    "R": first_last(lambda a, b: compare(b * b, abs(a)) <= 0),
                },
                {
                    "F": fn,
                    "f": fn,
                    "Lin": lambda z, s=slope: s * z,
                    "norm": abs,
                    "Sum": total,
                    "TSum": lambda h, t, base=total: base(h) + h * t,
                },
                dict(consts, d=slope),
            )
        )
    interps.append(
        Interpretation(
            {
                "phi": first_last(lambda h, k: compare(k, h * h) == 0),
                "P": lambda *args: any(a.is_exact_zero() for a in args),
                "Q": first_last(lambda a, b: compare(a, zero) >= 0),
                "R": lambda *args: True,
            },
            {"F": sq, "f": linear, "Lin": lambda z: 2 * z, "norm": abs, "Sum": sq, "TSum": lambda h, t: t},
            dict(consts, d=2, r=0),
        )
    )
    return interps


def counterexamples(
    pairs: Sequence[tuple[Formula, Formula]],
    interps: Sequence[Interpretation] | None = None,
    max_size: int = 6,
) -> list[tuple[int, SampleGrids, int, bool, bool]]:
    """(pair index, grids, interpretation index, lhs value, rhs value) for every disagreement."""
    interps = list(interps if interps is not None else default_interpretations())
    configs = list(grid_configurations(max_size))
    found = []
    for i, (lhs, rhs) in enumerate(pairs):
        for grids in configs:
            for j, interp in enumerate(interps):
                a = sample_semantics(lhs, grids, interp)
                b = sample_semantics(rhs, grids, interp)
                if a != b:
                    found.append((i, grids, j, a, b))
    return found
