from __future__ import annotations

import random

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.errors import (
    ClaimOneFailure,
    ContractViolation,
    IndexOutOfRange,
    InputSyntaxError,
    NotUnbounded,
    RankError,
    ThicknessPrecondition,
    Undecidable,
    Undecided,
)
from artifact.forcing import (
    EMPTY,
    EVENS,
    FORCED,
    NATURALS,
    ODDS,
    REFUTED,
    UNKNOWN,
    CardAtLeast,
    CardAtMost,
    Condition,
    ConditionSpace,
    Contains,
    GenerativeFiber,
    IncreasingMap,
    IndexSet,
    OpaqueFiber,
    SimpleName,
    TabularFiber,
    amalgamate,
    contains_all,
    decide_membership,
    decides,
    diag_name,
    diagonal_thick,
    differs_from_numerals,
    extends,
    family_is_empty,
    fiber_transforms,
    fix_constant,
    forces_clausal,
    forces_los,
    format_condition,
    format_family,
    format_fiber,
    format_hf,
    format_index_set,
    hf,
    one_point_one,
    parse_condition,
    parse_family,
    parse_fiber,
    parse_hf,
    parse_index_set,
    project,
    pseudo_generic,
    pullback,
    rank,
    reindex,
    restrict_rank,
    simplified_forces,
    split_fibers,
    standard_part_name,
    thickness_nu,
    trivial_condition,
    universe,
    von_neumann,
)
from artifact.forcing.constructions import Staircase
from artifact.forcing.los import holds
from artifact.formulas import parse_formula

import forcing_samples as samples

ZERO = EMPTY
ONE = hf(EMPTY)
TWO = von_neumann(2)


def const(rank_, *tuples):
    return TabularFiber.constant(frozenset(tuples), rank_)


PARITY = TabularFiber(1, [], [frozenset({(ZERO,)}), frozenset({(ONE,)})])


@pytest.fixture(scope="module")
def space():
    return ConditionSpace.exhaustive()


# hereditarily finite sets ------------------------------------------------------------------

def test_ranks_and_universe_sizes():
    assert rank(ZERO) == 0 and rank(ONE) == 1 and rank(von_neumann(5)) == 5
    assert [len(universe(r)) for r in range(4)] == [1, 2, 4, 16]


def test_numeral_printing():
    assert format_hf(von_neumann(2)) == "{{}, {{}}}"
    assert format_hf(von_neumann(3), numerals=True) == "3"
    assert parse_hf("vN(3)") == parse_hf("3") == von_neumann(3)


def test_equal_sets_are_one_object():
    assert parse_hf("{{{}}, {}}") is von_neumann(2)


@given(st.sampled_from(universe(3)))
def test_hf_round_trip(x):
    assert parse_hf(format_hf(x)) == x
    assert parse_hf(format_hf(x, numerals=True)) == x


def test_hf_syntax_error():
    with pytest.raises(InputSyntaxError):
        parse_hf("{{}")


# index sets ---------------------------------------------------------------------------------

def _members(p: IndexSet, n: int = 60) -> set:
    return {i for i in range(n) if i in p}


@given(st.randoms(use_true_random=False))
def test_index_set_algebra_against_python_sets(rng):
    p, q = samples.index_set(rng), samples.index_set(rng)
    assert _members(p & q) == _members(p) & _members(q)
    assert _members(p | q) == _members(p) | _members(q)
    assert _members(p - q) == _members(p) - _members(q)
    assert _members(p.complement()) == set(range(60)) - _members(p)
    assert _members(p.drop_least()) == _members(p) - {min(_members(p))}
    listed = sorted(_members(p, 200))
    assert [p.nth(k) for k in range(10)] == listed[:10]
    assert all(p.position(i) == k for k, i in enumerate(listed[:10]))


@given(st.randoms(use_true_random=False))
def test_index_set_select_and_format(rng):
    p, pos = samples.index_set(rng), samples.index_set(rng)
    listed = sorted(_members(p, 400))
    expected = {listed[k] for k in range(len(listed)) if k in pos and listed[k] < 60}
    assert _members(p.select(pos)) == expected
    assert parse_index_set(format_index_set(p)) == p


def test_index_set_text():
    p = parse_index_set("prelude=110 period=10")
    assert _members(p, 8) == {0, 1, 3, 5, 7}
    assert format_index_set(parse_index_set("evens")) == "prelude= period=10"
    with pytest.raises(InputSyntaxError):
        parse_index_set("period=")


def test_bounded_index_sets_are_rejected():
    with pytest.raises(NotUnbounded):
        Condition(IndexSet.finite([1, 2]), one_point_one())


@given(st.randoms(use_true_random=False))
def test_increasing_map_against_sorted_lists(rng):
    g = samples.increasing_map(rng)
    dom = sorted(_members(g.domain, 300))
    tgt = sorted(_members(g.target, 3000))
    for k, i in enumerate(dom[:12]):
        assert g(i) == tgt[k]
    off = next(i for i in range(100) if i not in g.domain) if not g.domain.complement().is_empty() else None
    if off is not None:
        assert g(off) == 0


# fibers and transforms ------------------------------------------------------------------------

def test_one_point_one():
    q = one_point_one()
    assert q.rank == 0 and q.value(7) == frozenset({()})


def test_projection_selects_a_coordinate():
    q = const(2, (ZERO, ONE))
    assert project(q, [1]).value(0) == frozenset({(ONE,)})


def test_restrict_to_full_rank_is_identity():
    q = const(2, (ZERO, ONE))
    assert restrict_rank(q, 2) is q
    assert restrict_rank(q, 1).value(3) == frozenset({(ZERO,)})


def test_reindex_by_evens_doubles_the_period():
    g = IncreasingMap(EVENS, NATURALS)
    r = reindex(PARITY, g)
    assert r.pattern()[1] == 2 * len(PARITY.period)
    assert [r.value(i) for i in (0, 2, 4, 6)] == [PARITY.value(k) for k in range(4)]
    assert r.value(1) == PARITY.value(0)


def test_transform_errors():
    q = const(2, (ZERO, ONE))
    with pytest.raises(IndexOutOfRange):
        restrict_rank(q, 3)
    with pytest.raises(IndexOutOfRange):
        project(q, [0, 0])
    with pytest.raises(IndexOutOfRange):
        fiber_transforms(q, project_to=[2])


def test_fiber_text_round_trip():
    for text in [
        "rank=2 prelude=[{({}, {{}})}] period=[{({}, {})}, {({{}}, {})}]",
        "rank=1 rule={(vN(i),), (vN(i+1),)}",
        "rank=2 rule={(vN(i-1), union({}, {vN(i)}))}",
    ]:
        q = parse_fiber(text)
        assert format_fiber(q) == text
        assert format_fiber(parse_fiber(format_fiber(q))) == text


def test_generative_values():
    q = parse_fiber("rank=1 rule={({vN(i+1), {}},)}")
    assert q.value(1) == frozenset({(hf(TWO, ZERO),)})


def test_fiber_values_must_be_nonempty():
    with pytest.raises(ContractViolation):
        TabularFiber(1, [], [frozenset()])


def test_opaque_fiber_needs_a_certificate():
    q = OpaqueFiber(1, lambda i: frozenset({(von_neumann(i % 2),)}))
    with pytest.raises(Undecidable):
        extends(Condition(NATURALS, q), trivial_condition())
    certified = OpaqueFiber(1, q.fn, horizon=(0, 2))
    assert forces_los(Condition(EVENS, certified), "G0 = 0")


# extension ------------------------------------------------------------------------------------

def test_every_condition_extends_the_unit_on_its_index_set():
    q = const(1, (ZERO,))
    assert extends(Condition(EVENS, q), trivial_condition())


def test_subset_failure():
    q = const(1, (ZERO,))
    assert not extends(Condition(NATURALS, q), Condition(EVENS, q))


def test_extension_tolerates_prelude_exceptions():
    wide = const(1, (ZERO,))
    narrow = TabularFiber(1, [frozenset({(ONE,)})], [frozenset({(ZERO,)})])
    assert extends(Condition(NATURALS, narrow), Condition(NATURALS, wide))
    assert not extends(Condition(NATURALS, TabularFiber(1, [], [frozenset({(ONE,)})])), Condition(NATURALS, wide))


@given(st.randoms(use_true_random=False), st.integers(0, 2))
def test_every_fiber_extends_the_unit(rng, k):
    p = samples.index_set(rng)
    assert extends(Condition(p, samples.tabular_fiber(rng, k)), Condition(p, one_point_one()))


@given(st.randoms(use_true_random=False))
def test_extends_against_brute_force(rng):
    k1, k2 = rng.randint(0, 2), rng.randint(0, 2)
    p1 = samples.index_set(rng)
    p2 = p1 & samples.index_set(rng) if rng.random() < 0.8 else samples.index_set(rng)
    if not p2.is_unbounded():
        return
    c1 = Condition(p1, samples.tabular_fiber(rng, k1))
    c2 = Condition(p2, samples.tabular_fiber(rng, k2))
    subset = all(i in p1 for i in range(200) if i in p2)
    fits = samples.brute_force_almost_all(
        p2, lambda i: all(t[:k1] in c1.q.value(i) for t in c2.q.value(i))
    )
    assert extends(c2, c1) == (k2 >= k1 and subset and fits)


def test_condition_text_round_trip():
    c = Condition(EVENS, PARITY)
    text = format_condition(c)
    assert text == "p: prelude= period=10\nq: rank=1 prelude=[] period=[{({},)}, {({{}},)}]"
    again = parse_condition(text)
    assert again.p == c.p and format_fiber(again.q) == format_fiber(c.q)
    assert parse_condition("p: N").rank == 0
    with pytest.raises(InputSyntaxError):
        parse_condition("q: rank=0 prelude=[] period=[{()}]")


# almost-all forcing ------------------------------------------------------------------------------

def test_los_membership_everywhere():
    assert forces_los(Condition(NATURALS, const(2, (ZERO, ONE))), "G0 in G1")


def test_los_parity_on_evens_and_naturals():
    assert forces_los(Condition(EVENS, PARITY), "G0 = {}")
    assert not forces_los(Condition(NATURALS, PARITY), "G0 = {}")


def test_los_constant_equation():
    assert forces_los(trivial_condition(), "{} = {}")


def test_los_rank_side_condition():
    with pytest.raises(RankError):
        forces_los(trivial_condition(), "G0 = G0")


def test_los_quantifiers_range_over_the_universe():
    c = Condition(NATURALS, const(1, (TWO,)))
    assert forces_los(c, "E x. (x in G0 & !(x = {}))")
    assert forces_los(c, "A x. (x in G0 -> x in 2)")


@given(st.randoms(use_true_random=False))
def test_los_against_brute_force(rng):
    k = rng.randint(1, 2)
    c = Condition(samples.index_set(rng), samples.tabular_fiber(rng, k))
    phi = parse_formula(samples.atom(rng, k))
    env = lambda t: {f"G{j}": x for j, x in enumerate(t)}
    oracle = samples.brute_force_almost_all(c.p, lambda i: all(holds(phi, env(t)) for t in c.q.value(i)))
    assert forces_los(c, phi) == oracle


@given(st.randoms(use_true_random=False))
def test_finite_edits_of_p_preserve_los(rng):
    k = rng.randint(1, 2)
    c = Condition(samples.index_set(rng), samples.tabular_fiber(rng, k))
    phi = samples.atom(rng, k)
    add = rng.sample(range(12), 3)
    remove = rng.sample(range(12), 3)
    edited = c.p.with_edits(add, remove)
    if edited.is_unbounded():
        assert forces_los(Condition(edited, c.q), phi) == forces_los(c, phi)


# clause-by-clause forcing ---------------------------------------------------------------------------

def test_space_size(space):
    assert len(space) == 852
    assert space.max_rank == 2


def test_st_forced_on_evens(space):
    assert forces_clausal(Condition(EVENS, PARITY), "st(G0)", space) == FORCED


def test_st_on_naturals(space):
    c = Condition(NATURALS, PARITY)
    assert forces_clausal(c, "st(G0)", space) != FORCED
    # the evens restriction forces st(G0), so the negation is not forced
    assert forces_clausal(c, "!st(G0)", space) != FORCED
    assert forces_clausal(c, "!st(G0)", space) == REFUTED


def test_negated_false_constant_atom_is_forced(space):
    for c in space.conditions[::50]:
        assert forces_clausal(c, "!({} in {})", space) == FORCED


def test_st_of_a_constant_is_forced(space):
    assert forces_clausal(trivial_condition(), "st({{}})", space) == FORCED


def test_clausal_rank_error(space):
    with pytest.raises(RankError):
        forces_clausal(trivial_condition(), "G0 = {}", space)


def test_clausal_unknown_when_the_space_runs_out(space):
    # a witness different from G0 may need a third column, which the space lacks
    for value in [(ZERO,), (ZERO, ZERO)]:
        c = Condition(NATURALS, const(len(value), value))
        assert forces_clausal(c, "E x. !(x = G0)", space) == UNKNOWN
    c = Condition(NATURALS, const(2, (ZERO, ONE)))
    assert forces_clausal(c, "E x. !(x = G0)", space) == FORCED


def test_clausal_condition_outside_the_space(space):
    c = Condition(IndexSet([], [True, False, False]), const(1, (ONE,)))
    assert c not in space.index
    assert forces_clausal(c, "0 in G0", space) == FORCED
    assert forces_clausal(c, "G0 = {}", space) == REFUTED


def _atoms():
    consts = ["{}", "{{}}", "{{{}}}"]
    atoms = ["G0 = G1", "G0 in G1", "G1 in G0"]
    for n in (0, 1):
        for z in consts:
            atoms += [f"G{n} = {z}", f"{z} in G{n}", f"G{n} in {z}"]
    return atoms


def test_clausal_agrees_with_los_on_a_sample(space):
    rng = random.Random(4)
    for c in rng.sample(space.conditions, 80):
        for a in _atoms():
            for phi in (a, f"!({a})"):
                if c.rank < 2 and "G1" in a or c.rank < 1:
                    continue
                verdict = forces_clausal(c, phi, space)
                if verdict != UNKNOWN:
                    assert (verdict == FORCED) == forces_los(c, phi)


def test_monotonicity_and_consistency(space):
    from artifact.forcing.clausal import evaluator_for, normalize

    ev = evaluator_for(space)
    for a in _atoms()[:9]:
        for phi in (parse_formula(a), parse_formula(f"!({a})")):
            forced = ev.forced(normalize(phi))
            negated = ev.forced(normalize(parse_formula(f"!({format_phi(phi)})")))
            assert forced & negated == 0
            for j in range(len(space)):
                if forced >> j & 1:
                    assert space.below[j] & ~forced == 0


def format_phi(phi):
    from artifact.formulas import format_formula

    return format_formula(phi)


def test_every_condition_has_a_deciding_extension(space):
    from artifact.forcing.clausal import evaluator_for, normalize

    ev = evaluator_for(space)
    for a in ["G0 = {}", "{} in G0", "G0 in G1"]:
        phi = normalize(parse_formula(a))
        decided = ev.forced(phi) | ev.forced(normalize(parse_formula(f"!({a})")))
        needs = 1 if "G1" not in a else 2
        for j, c in enumerate(space.conditions):
            if c.rank >= needs:
                assert space.below[j] & decided


# constructions -------------------------------------------------------------------------------------

def test_fix_constant():
    c, m = fix_constant(trivial_condition(), ONE)
    assert m == 0 and c.rank == 1
    assert c.q.value(5) == frozenset({(ONE,)})
    assert forces_los(c, "G0 = {{}}")
    assert extends(c, trivial_condition())


def test_fix_constant_twice():
    c1, m1 = fix_constant(trivial_condition(), ONE)
    c2, m2 = fix_constant(c1, TWO)
    assert (m1, m2, c2.rank) == (0, 1, 2)
    assert forces_los(c2, "G0 = 1") and forces_los(c2, "G1 = 2")
    assert extends(c2, c1)


def test_diag_name_avoids_numerals():
    c, m = diag_name(trivial_condition())
    assert differs_from_numerals(c, m, 12) == [True] * 13
    assert extends(c, trivial_condition())
    exceptions = [i for i in range(40) if c.q.value(i) == frozenset({(von_neumann(3),)})]
    assert exceptions == [3]


def test_decide_membership_on_the_growing_column():
    c, m = diag_name(trivial_condition())
    trace = Staircase()
    out = decide_membership(c, m, 16, trace)
    assert extends(out, c)
    assert standard_part_name(out, m, 16) == [1] * 17
    assert all(branch == "member" for _, _, branch in trace.steps)
    # only least-element drops: the staircase still covers every index
    assert out.p == NATURALS


def test_decide_membership_selects_a_parity_class():
    c = Condition(NATURALS, TabularFiber(1, [], [frozenset({(ONE,)}), frozenset({(ZERO,)})]))
    out = decide_membership(c, 0, 0)
    assert forces_los(out, "0 in G0")
    assert _members(out.p, 40) - set(range(4)) == {i for i in range(4, 40) if i % 2 == 0}


def test_decide_membership_single_step():
    c, _ = fix_constant(trivial_condition(), ONE)
    out = decide_membership(c, 0, 0)
    assert standard_part_name(out, 0, 0) == [1]


def test_decide_membership_negative_branch():
    values = frozenset({(ZERO,), (ONE,)})
    c = Condition(NATURALS, TabularFiber(1, [], [values]))
    out = decide_membership(c, 0, 1)
    assert extends(out, c)
    assert standard_part_name(out, 0, 1) == [0, 0]


def test_decide_membership_rejects_bad_name():
    with pytest.raises(ContractViolation):
        decide_membership(trivial_condition(), 0, 3)


def test_standard_part_of_a_constant():
    c, _ = fix_constant(trivial_condition(), parse_hf("{0, 2}"))
    assert standard_part_name(c, 0, 5) == [1, 0, 1, 0, 0, 0]


def test_standard_part_of_empty_column():
    c, _ = fix_constant(trivial_condition(), ZERO)
    assert standard_part_name(c, 0, 0) == [0]


def test_standard_part_undecided():
    with pytest.raises(Undecided):
        standard_part_name(Condition(NATURALS, PARITY), 0, 0)


def test_pseudo_generic_chain():
    rules = [
        ("name a constant", lambda c: fix_constant(c, ZERO)[0]),
        ("restrict to evens", lambda c: c.with_p(c.p & EVENS)),
    ]
    chain = pseudo_generic(trivial_condition(), rules)
    assert len(chain) == 3
    assert all(extends(b, a) for a, b in zip(chain, chain[1:]))


def test_pseudo_generic_without_rules():
    start = trivial_condition()
    assert pseudo_generic(start, []) == [start]


def test_pseudo_generic_deciding_rules():
    start = Condition(NATURALS, PARITY)
    rules = [(f"decide {n}", lambda c, n=n: decide_membership(c, 0, n)) for n in (0, 1)]
    final = pseudo_generic(start, rules)[-1]
    assert decides(final, parse_formula("0 in G0")) and decides(final, parse_formula("1 in G0"))


def test_pseudo_generic_reports_bad_finder():
    with pytest.raises(ContractViolation):
        pseudo_generic(Condition(EVENS, PARITY), [("widen", lambda c: c.with_p(NATURALS))])


# amalgamation, homogeneity, pullback -------------------------------------------------------------------

def test_amalgamate_constant_singleton():
    g = IncreasingMap(EVENS, ODDS)
    q = const(1, (ONE,))
    assert amalgamate(q, g).value(4) == frozenset({(ONE, ONE)})


@given(st.randoms(use_true_random=False))
def test_amalgamation_projections_recover_the_factors(rng):
    g = samples.increasing_map(rng)
    q = samples.tabular_fiber(rng, 1)
    joined = amalgamate(q, g)
    left, right = project(joined, [0]), project(joined, [1])
    for i in range(40):
        if i in g.domain:
            assert left.value(i) == q.value(i)
            assert right.value(i) == q.value(g(i))
    c = Condition(g.domain, q)
    assert extends(Condition(g.domain, joined), c)


@given(st.randoms(use_true_random=False))
def test_homogeneity(rng):
    k = rng.randint(1, 2)
    p = samples.index_set(rng)
    q1 = samples.tabular_fiber(rng, k + 1)
    order = list(range(k + 1))
    rng.shuffle(order)
    q2 = project(q1, order)
    sigma1 = list(range(k))
    sigma2 = [order.index(j) for j in sigma1]
    phi = samples.atom(rng, k)
    renamed = phi
    for j in reversed(range(k)):
        renamed = renamed.replace(f"G{j}", f"H{sigma2[j]}")
    renamed = renamed.replace("H", "G")
    original = phi
    for j in reversed(range(k)):
        original = original.replace(f"G{j}", f"G{sigma1[j]}")
    assert forces_los(Condition(p, q1), original) == forces_los(Condition(p, q2), renamed)


@given(st.randoms(use_true_random=False))
def test_pullback_invariance(rng):
    k = rng.randint(1, 2)
    g = samples.increasing_map(rng)
    q = samples.tabular_fiber(rng, k)
    phi = samples.atom(rng, k)
    assert forces_los(Condition(g.target, q), phi) == forces_los(Condition(g.domain, reindex(q, g)), phi)


# simplified forcing ---------------------------------------------------------------------------------------

PARITY_NAME = SimpleName((), (ZERO, ONE))


def test_simplified_examples():
    names = {"f": PARITY_NAME, "g": SimpleName.constant(ZERO)}
    assert simplified_forces(EVENS, "f = g", names)
    assert not simplified_forces(NATURALS, "f = g", names)
    assert simplified_forces(ODDS, "st(g)", names)
    assert not simplified_forces(NATURALS, "st(f)", names)
    assert simplified_forces(ODDS, "0 in f", names)
    assert simplified_forces(ODDS, "!(f = g)", names)


@given(st.randoms(use_true_random=False))
def test_simplified_forcing_under_pullback(rng):
    g = samples.increasing_map(rng)
    f1 = SimpleName([rng.choice(samples.SMALL_SETS)], [rng.choice(samples.SMALL_SETS) for _ in range(rng.randint(1, 3))])
    f2 = SimpleName.constant(rng.choice(samples.SMALL_SETS))
    sub = g.target & samples.index_set(rng)
    if not sub.is_unbounded():
        return
    pulled = g.preimage(sub)
    for phi in ("f = h", "f in h", "h in f", "st(f)"):
        before = simplified_forces(sub, phi, {"f": f1, "h": f2})
        after = simplified_forces(pulled, phi, {"f": pullback(f1, g), "h": pullback(f2, g)})
        assert before == after


# splitting ---------------------------------------------------------------------------------------------------

def test_split_identity_rule():
    split = split_fibers(parse_fiber("rank=1 rule={(vN(i),)}"), NATURALS, horizon=24)
    assert split.p1 == EVENS and split.p2 == ODDS
    assert [n for n, _ in split.stages[:5]] == [0, 1, 2, 3, 4]
    assert split.choices[3] == frozenset({von_neumann(3)})


def test_split_two_value_rule():
    split = split_fibers(parse_fiber("rank=1 rule={(vN(i),), (vN(i+1),)}"), NATURALS, horizon=24)
    assert [alpha for _, alpha in split.stages[:5]] == [0, 1, 2, 3, 4]
    assert split.choices[0] == frozenset({ZERO})


def test_split_halves_disjoint_to_horizon():
    split = split_fibers(parse_fiber("rank=1 rule={(vN(i),), (vN(i+2),)}"), EVENS, horizon=30)
    left = set().union(*(v for i, v in split.choices.items() if i in split.p1))
    right = set().union(*(v for i, v in split.choices.items() if i in split.p2))
    assert not left & right
    assert split.p1.is_unbounded() and split.p2.is_unbounded()
    assert (split.p1 | split.p2) <= EVENS


def test_split_requires_growth():
    with pytest.raises(ClaimOneFailure):
        split_fibers(parse_fiber("rank=1 rule={({},), (vN(i),)}"), NATURALS)
    with pytest.raises(ClaimOneFailure):
        split_fibers(PARITY, NATURALS)


# thickness ------------------------------------------------------------------------------------------------------

def test_contains_has_nu_m_plus_one():
    report = thickness_nu(Contains(5), 8)
    assert [r.nu for r in report.rows] == [m + 1 for m in range(9)]


def test_atmost_three_is_thin_at_four():
    report = thickness_nu(CardAtMost(3), 5)
    assert report.thick_up_to(3) and not report.rows[4].thick
    assert len(report.rows[4].witness) == 4


def test_all_sets_have_nu_m():
    assert [r.nu for r in thickness_nu(parse_family("all"), 6).rows] == list(range(7))


def _nu_oracle(fam, m, universe_size=7, n_cap=12):
    """Brute force over subsets of a finite ground set (the family's designated elements fit inside)."""
    import itertools

    ground = range(universe_size)
    worst = 0
    for size in range(m + 1):
        for a in itertools.combinations(ground, size):
            best = None
            for extra in range(0, n_cap - size + 1):
                rest = [x for x in ground if x not in a]
                if extra > len(rest):
                    break
                if any(set(a) | set(b) in fam for b in itertools.combinations(rest, extra)):
                    best = size + extra
                    break
            if best is None:
                return None
            worst = max(worst, best)
    return worst


@pytest.mark.parametrize(
    "text",
    ["contains(1)", "contains(0) & contains(2)", "contains(1) | atleast(3)", "!contains(0) & atmost(4)", "atleast(2) & !atleast(5) | contains(3)"],
)
def test_nu_against_brute_force(text):
    fam = parse_family(text)
    report = thickness_nu(fam, 3)
    assert [r.nu for r in report.rows] == [_nu_oracle(fam, m) for m in range(4)]


def _families(rng, depth=2):
    if depth == 0 or rng.random() < 0.35:
        kind = rng.randrange(4)
        if kind == 0:
            return Contains(rng.randrange(3))
        if kind == 1:
            return CardAtLeast(rng.randrange(5))
        if kind == 2:
            return CardAtMost(rng.randrange(2, 7))
        return parse_family("all")
    op = rng.randrange(3)
    if op == 0:
        return ~_families(rng, depth - 1)
    left, right = _families(rng, depth - 1), _families(rng, depth - 1)
    return left & right if op == 1 else left | right


@given(st.randoms(use_true_random=False))
def test_dichotomy(rng):
    p = contains_all(rng.sample(range(4), rng.randint(1, 2)))
    s = _families(rng)
    both = thickness_nu(p & s, 6).thick_up_to(), thickness_nu(p - s, 6).thick_up_to()
    assert any(both)


def test_family_text_round_trip():
    for text in ["contains(5)", "!(contains(1) | atmost(2)) & all", "atleast(2) & !contains(0) | none"]:
        assert format_family(parse_family(text)) == text
    with pytest.raises(InputSyntaxError) as info:
        parse_family("contains(1) &")
    assert info.value.position == 13


def test_diagonal_chain_of_contains():
    chain = [contains_all(range(n + 1)) for n in range(4)]
    report = diagonal_thick(chain, 5)
    assert report.thick
    assert report.guards == [1, 3, 5]
    assert report.bounds[2] == max(report.guards[:2]) == 3
    assert all(report.checked[n] <= report.bounds[n] for n in report.bounds)


def test_diagonal_single_family():
    report = diagonal_thick([Contains(1)], 4)
    assert report.thick and report.bounds == {}
    assert family_is_empty(report.composite - Contains(1))


def test_diagonal_precondition():
    with pytest.raises(ThicknessPrecondition):
        diagonal_thick([CardAtMost(2)], 3)
    with pytest.raises(ContractViolation):
        diagonal_thick([Contains(1), Contains(2)], 3)
