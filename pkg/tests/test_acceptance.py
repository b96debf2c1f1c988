"""The ten acceptance criteria, one test each, with a pass/fail line per criterion.

The lines appear in pytest's terminal summary; ``python3 tests/test_acceptance.py``
prints them without pytest.
"""

from __future__ import annotations

import random
import sys
import time
from fractions import Fraction
from pathlib import Path

import sympy

sys.path.insert(0, str(Path(__file__).parent))

import forcing_samples as samples  # noqa: E402
from artifact.calculus import (  # noqa: E402
    GeometricTail,
    IntervalUnion,
    derivative_at,
    lebesgue_measures,
    peano_study,
    riemann_integral,
    sigma_subadd_check,
    tagged_sum_check,
)
from artifact.expr import from_polynomial  # noqa: E402
from artifact.forcing import (  # noqa: E402
    EMPTY,
    EVENS,
    NATURALS,
    ODDS,
    UNKNOWN,
    CardAtLeast,
    CardAtMost,
    Condition,
    ConditionSpace,
    Contains,
    SimpleName,
    TabularFiber,
    contains_all,
    decide_membership,
    diag_name,
    diagonal_thick,
    extends,
    fix_constant,
    forces_clausal,
    forces_los,
    hf,
    parse_fiber,
    parse_hf,
    project,
    pullback,
    reindex,
    simplified_forces,
    standard_part_name,
    thickness_nu,
    trivial_condition,
    universe,
    von_neumann,
)
from artifact.forcing.clausal import evaluator_for, normalize  # noqa: E402
from artifact.forcing.hfsets import format_hf  # noqa: E402
from artifact.formulas import (  # noqa: E402
    alpha_equal,
    classify_delta_st,
    parse_formula,
    replay,
    rewrite_to_delta_st,
)
from artifact.formulas.semantics import counterexamples  # noqa: E402
from artifact.hyper import epsilon, monomial  # noqa: E402

HERE = Path(__file__).parent
RESULTS: dict[int, str] = {}
X = sympy.Symbol("x")


def _lines(path: Path) -> list[str]:
    return [l.strip() for l in path.read_text().splitlines() if l.strip() and not l.startswith("#")]


def report(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number:>2} [{'PASS' if ok else 'FAIL'}] {title}" + (f": {detail}" if detail else "")
    RESULTS[number] = line
    print(line, flush=True)
    assert ok, line


def _random_poly(rng: random.Random, max_degree: int = 6) -> dict[int, Fraction]:
    degree = rng.randint(0, max_degree)
    return {d: Fraction(rng.randint(-9, 9), rng.randint(1, 6)) for d in range(degree + 1)}


def _sympy_poly(coeffs: dict[int, Fraction]):
    return sum(sympy.Rational(c.numerator, c.denominator) * X**d for d, c in coeffs.items())


def _fraction(value) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def _rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-20, 20), rng.randint(1, 7))


def _interval(rng: random.Random) -> tuple[Fraction, Fraction]:
    a = _rational(rng)
    return a, a + Fraction(rng.randint(1, 30), rng.randint(1, 7))


# 1 ---------------------------------------------------------------------------------------

def test_criterion_01_derivative_oracle():
    start = time.perf_counter()
    rng = random.Random(101)
    increments = [epsilon(), monomial(1, 2), monomial(2, 1), monomial(-1, 1)]
    mismatches = 0
    for _ in range(25):
        coeffs = _random_poly(rng)
        expr, oracle = from_polynomial(coeffs), sympy.diff(_sympy_poly(coeffs), X)
        for _ in range(5):
            c = _rational(rng)
            expected = _fraction(oracle.subs(X, sympy.Rational(c.numerator, c.denominator)))
            if derivative_at(expr, c, increments, var="x") != expected:
                mismatches += 1
    elapsed = time.perf_counter() - start
    report(1, "derivative oracle equivalence", mismatches == 0 and elapsed < 5,
           f"125 points, {mismatches} mismatches, {elapsed:.2f} s")


# 2 ---------------------------------------------------------------------------------------

def test_criterion_02_hyperfinite_integral():
    rng = random.Random(202)
    bad_integrals = bad_tags = 0
    for _ in range(20):
        coeffs = _random_poly(rng)
        a, b = _interval(rng)
        expr = from_polynomial(coeffs)
        sa, sb = (sympy.Rational(t.numerator, t.denominator) for t in (a, b))
        antiderivative = sympy.integrate(_sympy_poly(coeffs), X)
        oracle = _fraction(antiderivative.subs(X, sb) - antiderivative.subs(X, sa))
        bad_integrals += riemann_integral(expr, a, b, var="x") != oracle
        bad_tags += sum(not tagged_sum_check(expr, a, b, s, var="x") for s in ("left", "right", "midpoint"))
    report(2, "hyperfinite integral", bad_integrals == 0 and bad_tags == 0,
           f"20 integrals, {bad_integrals} mismatches, {bad_tags} tagged-sum failures")


# 3 ---------------------------------------------------------------------------------------

def test_criterion_03_measure():
    rng = random.Random(303)
    bad_length = bad_additivity = 0
    for _ in range(20):
        a, b = _interval(rng)
        bad_length += lebesgue_measures(IntervalUnion(((a, b),))) != (b - a, b - a)
    for _ in range(20):
        a, b = _interval(rng)
        c = b + Fraction(rng.randint(1, 9), rng.randint(1, 5))
        d = c + Fraction(rng.randint(0, 9), rng.randint(1, 5))
        both = lebesgue_measures(IntervalUnion(((a, b), (c, d))))[0]
        parts = lebesgue_measures(IntervalUnion(((a, b),)))[0] + lebesgue_measures(IntervalUnion(((c, d),)))[0]
        bad_additivity += both != parts
    family = lambda n: IntervalUnion(((n, n + Fraction(1, 2 ** (n + 1))),))  # noqa: E731
    sigma = sigma_subadd_check(family, Fraction(1, 10**9), GeometricTail(0, Fraction(1, 2), Fraction(1, 2)))
    report(3, "measure", bad_length == 0 and bad_additivity == 0 and sigma.passed,
           f"{bad_length} length errors, {bad_additivity} additivity errors, geometric family depth {sigma.depth}")


# 4 ---------------------------------------------------------------------------------------

PROP_OUT = "Ast m:posint. Est n:posint. A x. (mag(x) < 1/n -> E y. (mag(y) < 1/m & phi(x, y)))"
DUAL_OUT = "Est m:posint. Ast n:posint. E x. (mag(x) < 1/n & A y. (mag(y) < 1/m -> phi(x, y)))"


def test_criterion_04_rewriter_golden():
    corpus = _lines(HERE / "data" / "rewrite_corpus.txt")
    displayed = _lines(HERE / "data" / "displayed_formulas.txt")
    golden = parse_formula((HERE / "golden" / "derivative_epsilon_delta.txt").read_text().strip())
    derivative, trace = rewrite_to_delta_st(
        parse_formula("Ain h. Ein k. (h != 0 -> (F(c + h) - F(c)) / h = d + k)"), collapse=True
    )
    golden_ok = alpha_equal(derivative, golden) and replay(trace)
    pair_ok = PROP_OUT in displayed and DUAL_OUT in displayed
    pair_ok &= alpha_equal(rewrite_to_delta_st(parse_formula("Ain h. Ein k. phi(h, k)"))[0], parse_formula(PROP_OUT))
    pair_ok &= alpha_equal(rewrite_to_delta_st(parse_formula("Ein h. Ain k. phi(h, k)"))[0], parse_formula(DUAL_OUT))
    bad = 0
    for text in corpus:
        out, tr = rewrite_to_delta_st(parse_formula(text))
        bad += not (classify_delta_st(out).delta_st and replay(tr))
    size = len(set(corpus) | set(displayed))
    report(4, "rewriter golden tests", golden_ok and pair_ok and bad == 0 and size >= 30,
           f"golden {golden_ok}, displayed pair {pair_ok}, {bad} corpus failures over {len(corpus)} inputs")


# 5 ---------------------------------------------------------------------------------------

def test_criterion_05_rewriter_refutation():
    pairs = []
    for text in _lines(HERE / "data" / "rewrite_corpus.txt"):
        f = parse_formula(text)
        pairs.append((f, rewrite_to_delta_st(f)[0]))
    found = counterexamples(pairs, max_size=6)
    report(5, "rewriter refutation suite", not found, f"{len(pairs)} pairs, {len(found)} counterexamples")


# 6 ---------------------------------------------------------------------------------------

def _atoms() -> list[str]:
    consts = [format_hf(z) for z in universe(2)] + ["{{{}}}", "2", "3"]
    atoms = ["G0 = G1", "G0 in G1", "G1 in G0", "G0 = G0", "G0 in G0", "{} in {{}}", "{} = {{}}"]
    for n in (0, 1):
        for z in consts:
            atoms += [f"G{n} = {z}", f"{z} in G{n}", f"G{n} in {z}"]
    return atoms


def _needed_rank(text: str) -> int:
    return 2 if "G1" in text else 1 if "G0" in text else 0


def test_criterion_06_forcing_equivalence():
    start = time.perf_counter()
    space = ConditionSpace.exhaustive(prelude_cap=2, period_cap=2, rank_cap=2, universe_rank=3)
    ev = evaluator_for(space)
    disagreements = definite = monotone = consistency = edits = 0
    rng = random.Random(606)
    for atom in _atoms():
        need = _needed_rank(atom)
        formulas = [atom, f"!({atom})"]
        masks = [ev.forced(normalize(parse_formula(t))) for t in formulas]
        consistency += bin(masks[0] & masks[1]).count("1")
        for mask in masks:
            for j in range(len(space)):
                if mask >> j & 1 and space.below[j] & ~mask:
                    monotone += 1
        for c in space.conditions:
            if c.rank < need:
                continue
            for text in formulas:
                verdict = forces_clausal(c, text, space)
                if verdict == UNKNOWN:
                    continue
                definite += 1
                disagreements += (verdict == "forced") != forces_los(c, text)
            edited = c.p.with_edits(rng.sample(range(6), 2), rng.sample(range(6), 2))
            if edited.is_unbounded():
                edits += forces_los(Condition(edited, c.q), atom) != forces_los(c, atom)
    elapsed = time.perf_counter() - start
    ok = definite > 0 and disagreements == monotone == consistency == edits == 0 and elapsed < 60
    report(6, "forcing equivalence", ok,
           f"{len(space)} conditions, {definite} definite verdicts, {disagreements} disagreements, "
           f"violations: monotonicity {monotone}, consistency {consistency}, finite edits {edits}; {elapsed:.1f} s")


# 7 ---------------------------------------------------------------------------------------

def _battery():
    zero, one, unit = EMPTY, hf(EMPTY), trivial_condition()
    named, _ = fix_constant(unit, one)
    return [
        diag_name(unit),
        fix_constant(unit, von_neumann(3)),
        fix_constant(unit, parse_hf("{0, 2}")),
        fix_constant(unit, zero),
        fix_constant(named, von_neumann(5)),
        (Condition(NATURALS, TabularFiber(1, [], [frozenset({(one,)}), frozenset({(zero,)})])), 0),
        (Condition(NATURALS, TabularFiber.constant(frozenset({(zero,), (one,)}), 1)), 0),
        (Condition(NATURALS, parse_fiber("rank=1 rule={(vN(i),), (vN(i+1),)}")), 0),
        (Condition(EVENS, parse_fiber("rank=1 rule={({vN(i+1), {}},)}")), 0),
        (Condition(ODDS, parse_fiber("rank=2 rule={(vN(i), vN(i+2))}")), 1),
    ]


def test_criterion_07_diagonalization():
    failures = []
    for k, (c, m) in enumerate(_battery()):
        out = decide_membership(c, m, 16)
        if not extends(out, c):
            failures.append(f"#{k} does not extend")
            continue
        bits = standard_part_name(out, m, 16)
        if len(bits) != 17:
            failures.append(f"#{k} decided {len(bits)} numbers")
    report(7, "diagonalization", not failures, f"10 conditions, B = 16, failures {failures or 'none'}")


# 8 ---------------------------------------------------------------------------------------

def _family(rng: random.Random, depth: int = 2):
    if depth == 0 or rng.random() < 0.35:
        kind = rng.randrange(4)
        if kind == 0:
            return Contains(rng.randrange(4))
        if kind == 1:
            return CardAtLeast(rng.randrange(5))
        if kind == 2:
            return CardAtMost(rng.randrange(2, 8))
        return contains_all(rng.sample(range(4), 2))
    op = rng.randrange(3)
    if op == 0:
        return ~_family(rng, depth - 1)
    left, right = _family(rng, depth - 1), _family(rng, depth - 1)
    return left & right if op == 1 else left | right


def test_criterion_08_thickness():
    nu_ok = all(
        [r.nu for r in thickness_nu(Contains(x), 8).rows] == [m + 1 for m in range(9)] for x in (0, 5, 17)
    )
    rng = random.Random(808)
    pairs = violations = 0
    while pairs < 50:
        p = contains_all(rng.sample(range(5), rng.randint(1, 3)))
        if rng.random() < 0.5:
            p = p & CardAtLeast(rng.randint(0, 6))
        if not thickness_nu(p, 6).thick_up_to():
            continue
        s = _family(rng)
        pairs += 1
        if not (thickness_nu(p & s, 6).thick_up_to() or thickness_nu(p - s, 6).thick_up_to()):
            violations += 1
    chain = [contains_all(range(n + 1)) for n in range(4)]
    diag = diagonal_thick(chain, 5)
    bounds_ok = all(diag.checked[n] <= diag.bounds[n] for n in diag.bounds)
    report(8, "thickness", nu_ok and violations == 0 and diag.thick and bounds_ok,
           f"nu(m) = m+1 {nu_ok}, dichotomy violations {violations}/50, "
           f"4-chain thick to m = 5 {diag.thick}, bounds {diag.bounds}")


# 9 ---------------------------------------------------------------------------------------

def test_criterion_09_peano():
    from artifact.expr import parse_expr

    study = peano_study(parse_expr("2*x"), Fraction(1, 4), 1, levels=7, grid=[Fraction(k, 4) for k in range(5)])
    at_one = study[-1]
    errors = [v - 1 for v in at_one.values]
    steps = [Fraction(1, 2**k) for k in range(2, 9)]
    exact = errors == [-h for h in steps]
    halving = all(r == Fraction(1, 2) for r in at_one.ratios)
    close = all(abs(s.extrapolated - s.x**2) <= Fraction(1, 10**6) for s in study)
    report(9, "Peano Euler polygons", exact and halving and close,
           f"errors -h for h = 2^-2..2^-8: {exact}, ratios 1/2: {halving}, extrapolation within 1e-6: {close}")


# 10 --------------------------------------------------------------------------------------

def _homogeneity_violation(rng: random.Random) -> bool:
    k = rng.randint(1, 2)
    p = samples.index_set(rng)
    q1 = samples.tabular_fiber(rng, k + 1)
    order = list(range(k + 1))
    rng.shuffle(order)
    q2 = project(q1, order)
    phi = samples.atom(rng, k)
    renamed = phi
    for j in reversed(range(k)):
        renamed = renamed.replace(f"G{j}", f"H{order.index(j)}")
    return forces_los(Condition(p, q1), phi) != forces_los(Condition(p, q2), renamed.replace("H", "G"))


def _pullback_violation(rng: random.Random) -> bool:
    k = rng.randint(1, 2)
    g = samples.increasing_map(rng)
    q = samples.tabular_fiber(rng, k)
    phi = samples.atom(rng, k)
    if forces_los(Condition(g.target, q), phi) != forces_los(Condition(g.domain, reindex(q, g)), phi):
        return True
    f1 = SimpleName([rng.choice(samples.SMALL_SETS)], [rng.choice(samples.SMALL_SETS) for _ in range(rng.randint(1, 3))])
    f2 = SimpleName.constant(rng.choice(samples.SMALL_SETS))
    sub = g.target & samples.index_set(rng)
    if not sub.is_unbounded():
        return False
    for text in ("f = h", "f in h", "h in f", "st(f)"):
        if simplified_forces(sub, text, {"f": f1, "h": f2}) != simplified_forces(
            g.preimage(sub), text, {"f": pullback(f1, g), "h": pullback(f2, g)}
        ):
            return True
    return False


def test_criterion_10_homogeneity_and_pullback():
    rng = random.Random(1010)
    homogeneity = sum(_homogeneity_violation(rng) for _ in range(100))
    pullbacks = sum(_pullback_violation(rng) for _ in range(100))
    report(10, "homogeneity and pullback", homogeneity == pullbacks == 0,
           f"100 samples each, violations: homogeneity {homogeneity}, pullback {pullbacks}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
