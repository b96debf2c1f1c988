"""Infinitesimal calculus on the expression class, computed exactly.

Derivatives are shadows of difference quotients at infinitesimal increments.
Integrals over the hyperfinite grid ``{i*h}`` are evaluated in closed form by
power-sum identities, with the endpoint remainders kept as symbols, so no
unlimited sum is ever enumerated. Measures, Euler polygons and a Frechet
derivative check are built on the same pieces.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

from .errors import (
    CertificateInsufficient,
    ContractViolation,
    InputSyntaxError,
    NonConvergence,
    NotDifferentiable,
)
from .expr import Expr, eval_expr, eval_rational, free_variables, to_polynomial
from .hyper import (
    INFINITESIMAL,
    LCNum,
    approx,
    classify,
    compare,
    epsilon,
    from_rational,
    is_limited,
    monomial,
    shadow,
)

Rational = Union[int, Fraction]
DEFAULT_H_CHOICES = (epsilon(), monomial(1, 2), monomial(2, 1), monomial(-1, 1))


def _univariate(f: Expr, var: str | None) -> str:
    names = free_variables(f)
    if var is not None:
        extra = names - {var}
        if extra:
            raise ContractViolation(f"expression has extra free variables {sorted(extra)}")
        return var
    if len(names) > 1:
        raise ContractViolation(f"expression is not univariate: {sorted(names)}")
    return next(iter(names)) if names else "x"


# derivatives ---------------------------------------------------------------------

@dataclass(frozen=True)
class QuotientWitness:
    h: LCNum
    quotient: LCNum
    shadow: Fraction | None


def derivative_at(
    f: Expr | Callable[[LCNum], LCNum],
    c: Rational,
    h_choices: Sequence[LCNum] | None = None,
    var: str | None = None,
) -> Fraction:
    """Common shadow of ``(f(c+h) - f(c)) / h`` over the infinitesimal increments."""
    if callable(f):
        fn = f
    else:
        name = _univariate(f, var)
        fn = lambda x: eval_expr(f, {name: x})  # noqa: E731
    hs = list(DEFAULT_H_CHOICES if h_choices is None else h_choices)
    if not hs:
        raise ContractViolation("at least one increment is required")
    point = from_rational(Fraction(c))
    base = fn(point)
    witnesses: list[QuotientWitness] = []
    for h in hs:
        h = LCNum.coerce(h)
        if classify(h) != INFINITESIMAL:
            raise ContractViolation(f"increment {h} is not a nonzero infinitesimal")
        q = (fn(point + h) - base) / h
        if not is_limited(q):
            witnesses.append(QuotientWitness(h, q, None))
            raise NotDifferentiable(f"difference quotient {q} is unlimited at h = {h}", witnesses)
        s = shadow(q)
        if not approx(q, from_rational(s)):
            raise NotDifferentiable(f"quotient {q} is not infinitely close to {s}", witnesses)
        witnesses.append(QuotientWitness(h, q, s))
    values = {w.shadow for w in witnesses}
    if len(values) > 1:
        raise NotDifferentiable(
            "difference quotients have different shadows: "
            + ", ".join(f"h={w.h}: {w.shadow}" for w in witnesses),
            witnesses,
        )
    return values.pop()


# a small polynomial ring in (h, theta_a, theta_b) -------------------------------------

class MPoly:
    """Sparse polynomial with Fraction coefficients over named variables."""

    __slots__ = ("vars", "terms")

    def __init__(self, variables: tuple[str, ...], terms: Mapping[tuple[int, ...], Fraction] | None = None):
        self.vars = variables
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v}

    @classmethod
    def const(cls, variables, value) -> "MPoly":
        return cls(variables, {(0,) * len(variables): Fraction(value)})

    @classmethod
    def var(cls, variables, name: str) -> "MPoly":
        exps = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {exps: Fraction(1)})

    def _lift(self, other) -> "MPoly":
        return other if isinstance(other, MPoly) else MPoly.const(self.vars, other)

    def __add__(self, other) -> "MPoly":
        other = self._lift(other)
        out = dict(self.terms)
        for k, v in other.terms.items():
            out[k] = out.get(k, 0) + v
        return MPoly(self.vars, out)

    __radd__ = __add__

    def __neg__(self) -> "MPoly":
        return MPoly(self.vars, {k: -v for k, v in self.terms.items()})

    def __sub__(self, other) -> "MPoly":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "MPoly":
        return self._lift(other) - self

    def __mul__(self, other) -> "MPoly":
        other = self._lift(other)
        out: dict = {}
        for ka, va in self.terms.items():
            for kb, vb in other.terms.items():
                k = tuple(x + y for x, y in zip(ka, kb))
                out[k] = out.get(k, 0) + va * vb
        return MPoly(self.vars, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MPoly":
        out = MPoly.const(self.vars, 1)
        for _ in range(n):
            out = out * self
        return out

    def coefficient_in(self, name: str, degree: int) -> "MPoly":
        """Collect the coefficient of ``name**degree`` (still a polynomial in the others)."""
        idx = self.vars.index(name)
        out = {}
        for k, v in self.terms.items():
            if k[idx] == degree:
                out[k[:idx] + (0,) + k[idx + 1:]] = v
        return MPoly(self.vars, out)

    def is_constant(self) -> bool:
        return all(not any(k) for k in self.terms)

    def constant(self) -> Fraction:
        return self.terms.get((0,) * len(self.vars), Fraction(0))

    def evaluate(self, values: Mapping[str, object]):
        total = from_rational(0)
        for k, v in self.terms.items():
            term = from_rational(v)
            for name, e in zip(self.vars, k):
                if e:
                    term = term * LCNum.coerce(values[name]) ** e
            total = total + term
        return total


# power sums --------------------------------------------------------------------------

def bernoulli_numbers(n: int) -> list[Fraction]:
    """B_0..B_n with the convention B_1 = +1/2."""
    b = [Fraction(1)]
    for m in range(1, n + 1):
        b.append(-sum(math.comb(m + 1, k) * b[k] for k in range(m)) / (m + 1))
    if n >= 1:
        b[1] = Fraction(1, 2)
    return b


def power_sum_coefficients(d: int) -> list[Fraction]:
    """Coefficients p_j with sum_{i=0}^{n} i^d = sum_j p_j n^j."""
    if d == 0:
        return [Fraction(1), Fraction(1)]
    b = bernoulli_numbers(d)
    coeffs = [Fraction(0)] * (d + 2)
    for k in range(d + 1):
        coeffs[d + 1 - k] += Fraction(math.comb(d + 1, k)) * b[k] / (d + 1)
    return coeffs


_SUM_VARS = ("h", "theta_a", "theta_b")


def _scaled_power_sum(d: int, upper: MPoly) -> MPoly:
    """h^(d+1) * sum_{i=0}^{n} i^d where ``upper`` is n*h."""
    h = MPoly.var(_SUM_VARS, "h")
    out = MPoly(_SUM_VARS)
    for j, p in enumerate(power_sum_coefficients(d)):
        if p:
            out = out + p * upper ** j * h ** (d + 1 - j)
    return out


def _grid_ends(a: Fraction, b: Fraction) -> tuple[MPoly, MPoly]:
    """Symbolic i_b*h and (i_a - 1)*h on the grid {i*h}.

    i_a is the least index with a <= i_a*h, so i_a*h = a + theta_a*h with
    0 <= theta_a < 1; i_b is the greatest index with i_b*h <= b, so
    i_b*h = b - theta_b*h.
    """
    h = MPoly.var(_SUM_VARS, "h")
    upper = MPoly.const(_SUM_VARS, b) - MPoly.var(_SUM_VARS, "theta_b") * h
    below = MPoly.const(_SUM_VARS, a) + MPoly.var(_SUM_VARS, "theta_a") * h - h
    return upper, below


def _coeffs(f: Expr, var: str | None) -> dict[int, Fraction]:
    return to_polynomial(f, _univariate(f, var))


def riemann_sum_polynomial(
    f: Expr, a: Rational, b: Rational, var: str | None = None, shift: Rational = 0
) -> MPoly:
    """Closed form of sum_{i=i_a}^{i_b} f(i*h + shift*h) * h as a polynomial in (h, theta_a, theta_b)."""
    a, b, shift = Fraction(a), Fraction(b), Fraction(shift)
    coeffs = _coeffs(f, var)
    upper, below = _grid_ends(a, b)
    total = MPoly(_SUM_VARS)
    for d, c in coeffs.items():
        # (i*h + s*h)^d = sum_k C(d,k) (s*h)^(d-k) (i*h)^k
        for k in range(d + 1):
            weight = c * math.comb(d, k) * shift ** (d - k)
            if not weight:
                continue
            hpow = MPoly.var(_SUM_VARS, "h") ** (d - k)
            block = _scaled_power_sum(k, upper) - _scaled_power_sum(k, below)
            total = total + weight * hpow * block
    return total


def _shadow_of(poly: MPoly) -> Fraction:
    constant_part = poly.coefficient_in("h", 0)
    if not constant_part.is_constant():
        raise ArithmeticError("grid remainder leaked into the standard part")
    return constant_part.constant()


@dataclass(frozen=True)
class Estimate:
    value: Fraction
    order: float | None
    increment: Fraction
    levels: int


def riemann_integral(
    f: Expr,
    a: Rational,
    b: Rational,
    mode: str = "symbolic",
    var: str | None = None,
    max_levels: int = 14,
    tol: Fraction = Fraction(1, 10**12),
):
    """Integral of ``f`` over [a, b] as the shadow of the hyperfinite Riemann sum.

    ``symbolic`` requires a polynomial and returns an exact Fraction. ``numeric``
    accepts any expression and returns an Estimate from Richardson-extrapolated
    left sums at meshes (b - a)/2^j.
    """
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise ContractViolation("integration bounds must satisfy a < b")
    if mode == "symbolic":
        return _shadow_of(riemann_sum_polynomial(f, a, b, var))
    if mode == "numeric":
        return _numeric_integral(f, a, b, var, max_levels, Fraction(tol))
    raise ContractViolation(f"unknown mode {mode!r}")


def riemann_sum_at(
    f: Expr,
    a: Rational,
    b: Rational,
    h: LCNum,
    theta_a: Rational = 0,
    theta_b: Rational = 0,
    var: str | None = None,
) -> LCNum:
    """The hyperfinite sum evaluated at a concrete increment and remainder choice."""
    if classify(LCNum.coerce(h)) != INFINITESIMAL or compare(LCNum.coerce(h), from_rational(0)) <= 0:
        raise ContractViolation("h must be a positive infinitesimal")
    for t in (theta_a, theta_b):
        if not 0 <= Fraction(t) < 1:
            raise ContractViolation("grid remainders lie in [0, 1)")
    poly = riemann_sum_polynomial(f, a, b, var)
    return poly.evaluate({"h": h, "theta_a": Fraction(theta_a), "theta_b": Fraction(theta_b)})


def _numeric_integral(f, a, b, var, max_levels, tol) -> Estimate:
    name = _univariate(f, var)
    table: list[list[Fraction]] = []
    first_column: list[Fraction] = []
    for j in range(max_levels + 1):
        n = 2 ** j
        step = (b - a) / n
        s = sum((eval_rational(f, {name: a + i * step}) for i in range(n)), Fraction(0)) * step
        first_column.append(s)
        row = [s]
        for k in range(1, j + 1):
            row.append(row[k - 1] + (row[k - 1] - table[j - 1][k - 1]) / (2 ** k - 1))
        table.append(row)
        if j >= 2:
            increment = abs(row[-1] - table[j - 1][-1])
            if increment <= tol:
                return Estimate(row[-1], _observed_order(first_column), increment, j + 1)
    raise NonConvergence(f"no convergence within {max_levels + 1} levels")


def _observed_order(column: Sequence[Fraction]) -> float | None:
    if len(column) < 3:
        return None
    d1 = column[-2] - column[-3]
    d2 = column[-1] - column[-2]
    if d1 == 0 or d2 == 0:
        return None
    return math.log2(abs(d1 / d2))


def tagged_sum_check(
    f: Expr, a: Rational, b: Rational, tag_scheme: str, var: str | None = None
) -> bool:
    """Compare the shadow of a tagged sum with the untagged one.

    Tags are i*h + k*h with k = 0, 1, 1/2 for left, right and midpoint. The
    last cell [i_b*h, b] has width theta_b*h, and its tag is placed at
    i_b*h + k*theta_b*h so it stays inside [a, b].
    """
    shifts = {"left": Fraction(0), "right": Fraction(1), "midpoint": Fraction(1, 2)}
    if tag_scheme not in shifts:
        raise ContractViolation(f"unknown tag scheme {tag_scheme!r}")
    a, b = Fraction(a), Fraction(b)
    if not a < b:
        raise ContractViolation("bounds must satisfy a < b")
    kappa = shifts[tag_scheme]
    name = _univariate(f, var)
    coeffs = to_polynomial(f, name)
    tagged = riemann_sum_polynomial(f, a, b, name, shift=kappa)
    h = MPoly.var(_SUM_VARS, "h")
    last, _ = _grid_ends(a, b)
    theta_b = MPoly.var(_SUM_VARS, "theta_b")

    def f_of(x: MPoly) -> MPoly:
        out = MPoly(_SUM_VARS)
        for d, c in coeffs.items():
            out = out + c * x ** d
        return out

    tagged = tagged - f_of(last + kappa * h) * h + f_of(last + kappa * theta_b * h) * h
    plain = riemann_sum_polynomial(f, a, b, name)
    return _shadow_of(tagged) == _shadow_of(plain)


# Euler polygons -------------------------------------------------------------------------

@dataclass(frozen=True)
class Polyline:
    vertices: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        xs = [x for x, _ in self.vertices]
        if any(x1 >= x2 for x1, x2 in zip(xs, xs[1:])):
            raise ContractViolation("polyline x values must be strictly increasing")

    def value_at(self, x: Rational) -> Fraction:
        x = Fraction(x)
        for vx, vy in self.vertices:
            if vx == x:
                return vy
        raise KeyError(x)


def peano_euler(
    f: Expr, h: Rational, x_max: Rational, x0: Rational = 0, y0: Rational = 0
) -> Polyline:
    """Exact Euler polygon for y' = f(x, y) from (x0, y0) until x >= x_max."""
    h, x_max = Fraction(h), Fraction(x_max)
    if h <= 0 or x_max <= Fraction(x0):
        raise ContractViolation("need h > 0 and x_max > x0")
    x, y = Fraction(x0), Fraction(y0)
    vertices = [(x, y)]
    while x < x_max:
        y = y + h * eval_rational(f, {"x": x, "y": y})
        x = x + h
        vertices.append((x, y))
    return Polyline(tuple(vertices))


@dataclass(frozen=True)
class GridPointStudy:
    x: Fraction
    values: tuple[Fraction, ...]
    extrapolated: Fraction
    ratios: tuple[Fraction | None, ...]


def peano_study(
    f: Expr, h0: Rational, x_max: Rational, levels: int = 6, grid: Iterable[Rational] | None = None
) -> list[GridPointStudy]:
    """Euler polygons at h0, h0/2, ... and Richardson values on a rational grid.

    Euler's method is first order, so a linear error model in h is removed at
    each step. ``ratios`` are successive error-difference ratios, which tend
    to 1/2 when the model holds.
    """
    h0 = Fraction(h0)
    polys = [peano_euler(f, h0 / 2 ** k, x_max) for k in range(levels)]
    if grid is None:
        grid = [x for x, _ in polys[0].vertices]
    out = []
    for g in grid:
        g = Fraction(g)
        values = tuple(p.value_at(g) for p in polys)
        table = [list(values)]
        for k in range(1, len(values)):
            prev = table[-1]
            table.append([(2 ** k * prev[i + 1] - prev[i]) / (2 ** k - 1) for i in range(len(prev) - 1)])
        diffs = [values[i + 1] - values[i] for i in range(len(values) - 1)]
        ratios = tuple(
            (diffs[i + 1] / diffs[i]) if diffs[i] else None for i in range(len(diffs) - 1)
        )
        out.append(GridPointStudy(g, values, table[-1][0], ratios))
    return out


# measure ---------------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalUnion:
    intervals: tuple[tuple[Fraction, Fraction], ...] = ()

    def __post_init__(self):
        ivs = tuple((Fraction(a), Fraction(b)) for a, b in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        for a, b in ivs:
            if a > b:
                raise ContractViolation(f"interval [{a},{b}] has a > b")
        for (_, b1), (a2, _) in zip(ivs, ivs[1:]):
            if not b1 < a2:
                raise ContractViolation("intervals must be sorted and pairwise disjoint")

    @classmethod
    def from_pieces(cls, pieces: Iterable[tuple[Rational, Rational]]) -> "IntervalUnion":
        """Union of arbitrary closed intervals, merging overlaps."""
        merged: list[list[Fraction]] = []
        for a, b in sorted((Fraction(a), Fraction(b)) for a, b in pieces):
            if merged and a <= merged[-1][1]:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    def union(self, other: "IntervalUnion") -> "IntervalUnion":
        return IntervalUnion.from_pieces(self.intervals + other.intervals)

    def contains(self, other: "IntervalUnion") -> bool:
        return all(any(a <= c and d <= b for a, b in self.intervals) for c, d in other.intervals)

    def length(self) -> Fraction:
        return sum((b - a for a, b in self.intervals), Fraction(0))

    def __str__(self) -> str:
        return format_intervals(self)


def format_intervals(e: IntervalUnion) -> str:
    if not e.intervals:
        return "empty"
    return "+".join(f"[{a},{b}]" for a, b in e.intervals)


_INTERVAL = re.compile(r"\[\s*(-?\d+(?:/\d+)?)\s*,\s*(-?\d+(?:/\d+)?)\s*\]")


def parse_intervals(text: str) -> IntervalUnion:
    s = text.strip()
    if s in ("", "empty", "{}"):
        return IntervalUnion()
    pieces = []
    pos = 0
    while True:
        m = _INTERVAL.match(s, pos)
        if not m:
            raise InputSyntaxError("expected an interval like [a,b]", pos, text)
        pieces.append((Fraction(m.group(1)), Fraction(m.group(2))))
        pos = m.end()
        while pos < len(s) and s[pos].isspace():
            pos += 1
        if pos == len(s):
            break
        if s[pos] != "+":
            raise InputSyntaxError("expected '+' between intervals", pos, text)
        pos += 1
        while pos < len(s) and s[pos].isspace():
            pos += 1
    return IntervalUnion(tuple(pieces))


def cover_size_polynomial(a: Rational, b: Rational) -> MPoly:
    """|A|*h for A the grid points in [a, b]: (b - a) + (1 - theta_a - theta_b)*h."""
    upper, below = _grid_ends(Fraction(a), Fraction(b))
    return upper - below


def lebesgue_measures(e: IntervalUnion) -> tuple[Fraction, Fraction]:
    """Outer and inner measure from minimal grid covers of each interval."""
    total = Fraction(0)
    for a, b in e.intervals:
        total += _shadow_of(cover_size_polynomial(a, b))
    # the same grid points form the largest inner approximation, so both agree
    return total, total


@dataclass(frozen=True)
class GeometricTail:
    """Certificate: the length of member n is at most constant * ratio**n for n >= start."""

    start: int
    constant: Fraction
    ratio: Fraction

    def bound_after(self, n: int) -> Fraction:
        """Upper bound for the summed lengths of members n+1, n+2, ..."""
        first = max(n + 1, self.start)
        return Fraction(self.constant) * Fraction(self.ratio) ** first / (1 - Fraction(self.ratio))


@dataclass(frozen=True)
class SubadditivityReport:
    passed: bool
    depth: int
    union_measure: Fraction
    sum_of_measures: Fraction | None
    tail_bound: Fraction
    slack: Fraction
    exact_equality: bool
    details: list = field(default_factory=list)


def sigma_subadd_check(
    family: Sequence[IntervalUnion] | Callable[[int], IntervalUnion],
    eps: Rational,
    tail: GeometricTail | None = None,
    divergent: bool = False,
    max_depth: int = 256,
) -> SubadditivityReport:
    """Check m(union E_n) <= sum m(E_n) + eps with per-member slack eps/2^(n+1).

    The union is handled exactly up to a depth N chosen so the certified tail
    is at most eps/2; the tail is charged against the remaining eps budget.
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ContractViolation("eps must be positive")
    get = family if callable(family) else None
    available = max_depth if get else len(family)
    if tail is None:
        if get is not None and not divergent:
            raise CertificateInsufficient("an infinite family needs a tail certificate")
        depth = available - 1 if get is None else max_depth - 1
        tail_bound = Fraction(0)
    else:
        if not 0 < Fraction(tail.ratio) < 1:
            raise CertificateInsufficient("tail ratio must lie in (0, 1)")
        depth = max(tail.start - 1, 0)
        while tail.bound_after(depth) > eps / 2:
            depth += 1
            if depth >= min(available, max_depth):
                raise CertificateInsufficient(
                    f"tail bound stays above eps/2 through depth {depth}"
                )
        tail_bound = tail.bound_after(depth)
    if depth < 0:
        return SubadditivityReport(True, -1, Fraction(0), Fraction(0), Fraction(0), Fraction(0), True)
    members = [get(n) if get else family[n] for n in range(depth + 1)]
    details = []
    union = IntervalUnion()
    cover_total = Fraction(0)
    measure_total = Fraction(0)
    for n, member in enumerate(members):
        outer, _ = lebesgue_measures(member)
        slack_n = eps / 2 ** (n + 1)
        # each cover satisfies |A_n|*h < r_n + slack_n; its size differs from r_n by O(h)
        details.append((n, outer, slack_n))
        cover_total += outer + slack_n
        measure_total += outer
        union = union.union(member)
    union_measure = lebesgue_measures(union)[0]
    slack = sum((d[2] for d in details), Fraction(0))
    if divergent:
        return SubadditivityReport(True, depth, union_measure, None, tail_bound, slack, False, details)
    passed = union_measure + tail_bound <= measure_total + eps and union_measure <= cover_total
    return SubadditivityReport(
        passed, depth, union_measure, measure_total, tail_bound, slack,
        union_measure == measure_total and tail_bound == 0, details,
    )


# Frechet derivative ---------------------------------------------------------------------------

def _sup_norm(values: Sequence[LCNum]) -> LCNum:
    best = from_rational(0)
    for v in values:
        a = abs(v)
        if compare(a, best) > 0:
            best = a
    return best


def frechet_ratios(
    matrix: Sequence[Sequence[Rational]],
    f: Sequence[Expr],
    x: Sequence[Rational],
    directions: Sequence[Sequence[Rational]],
    names: Sequence[str] | None = None,
) -> list[LCNum]:
    """Ratios ||f(x+z) - f(x) - A z|| / ||z|| for z = eps * d, using the sup-norm."""
    n = len(x)
    names = list(names) if names is not None else [f"x{i + 1}" for i in range(n)]
    if len(names) != n or any(len(row) != n for row in matrix) or len(matrix) != len(f):
        raise ContractViolation("inconsistent dimensions")
    e = epsilon()
    base_env = {k: Fraction(v) for k, v in zip(names, x)}
    base = [eval_expr(fi, base_env) for fi in f]
    ratios = []
    for d in directions:
        if len(d) != n or all(Fraction(di) == 0 for di in d):
            raise ContractViolation("direction must be a nonzero vector of matching size")
        z = [e * from_rational(di) for di in d]
        env = {k: from_rational(v) + zi for (k, v), zi in zip(base_env.items(), z)}
        moved = [eval_expr(fi, env) for fi in f]
        residual = []
        for i, row in enumerate(matrix):
            lin = from_rational(0)
            for aij, zj in zip(row, z):
                lin = lin + from_rational(aij) * zj
            residual.append(moved[i] - base[i] - lin)
        ratios.append(_sup_norm(residual) / _sup_norm(z))
    return ratios


def frechet_check(matrix, f, x, directions, names=None) -> bool:
    """True iff every sampled ratio is zero or infinitesimal (only z = eps*d is sampled)."""
    return all(approx(r, 0) for r in frechet_ratios(matrix, f, x, directions, names))
