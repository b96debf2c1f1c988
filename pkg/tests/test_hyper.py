from __future__ import annotations

import itertools
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from artifact.errors import DecodeError, DivisionByZero, Indeterminate, UnlimitedValue
from artifact.hyper import (
    EPS,
    INFINITESIMAL,
    LIMITED_APPRECIABLE,
    UNLIMITED,
    ZERO_CLASS,
    LCNum,
    approx,
    classify,
    compare,
    decimal_decode,
    decimal_encode,
    epsilon,
    field_arith,
    format_lcnum,
    from_rational,
    inverse,
    is_limited,
    monomial,
    parse_lcnum,
    shadow,
)

from conftest import nonzero_fractions, small_fractions


def lc(text: str) -> LCNum:
    return parse_lcnum(text)


exact_numbers = st.lists(
    st.tuples(st.integers(-3, 3).map(Fraction), nonzero_fractions()), max_size=4
).map(lambda ts: LCNum(ts))
limited_numbers = st.lists(
    st.tuples(st.integers(0, 3).map(Fraction), nonzero_fractions()), max_size=4
).map(lambda ts: LCNum(ts))


class TestConstructors:
    def test_zero_is_empty(self):
        assert from_rational(0).terms == ()
        assert from_rational(0).is_exact_zero()

    def test_standard_embed(self):
        assert from_rational(3).terms == ((Fraction(0), Fraction(3)),)

    def test_epsilon(self):
        assert epsilon().terms == ((Fraction(1), Fraction(1)),)

    def test_terms_below_trunc(self):
        x = LCNum([(0, 1), (2, 5), (5, 1)], trunc=3)
        assert all(e < x.trunc for e, _ in x.terms)


class TestArithmetic:
    def test_difference_of_squares(self):
        three = from_rational(3)
        assert (three + EPS) * (three - EPS) == lc("9 - 1*eps^2")

    def test_geometric_series(self):
        got = field_arith(from_rational(1), from_rational(1) - EPS, "div", order=4)
        assert got.terms == tuple((Fraction(k), Fraction(1)) for k in range(4))
        assert got.trunc == 4

    def test_binomial(self):
        five = from_rational(5)
        assert (five + EPS) ** 2 - from_rational(25) == lc("10*eps^1 + 1*eps^2")

    def test_division_by_zero(self):
        with pytest.raises(DivisionByZero):
            field_arith(from_rational(1), from_rational(0), "div")

    def test_monomial_inverse_exact(self):
        assert inverse(monomial(Fraction(2, 3), Fraction(-5, 2))) == monomial(Fraction(3, 2), Fraction(5, 2))

    @given(exact_numbers, exact_numbers, exact_numbers)
    def test_ring_axioms(self, a, b, c):
        assert a + b == b + a
        assert a * b == b * a
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
        assert a - a == from_rational(0)

    @given(exact_numbers)
    def test_inverse_up_to_truncation(self, a):
        if a.is_exact_zero():
            return
        product = a * inverse(a) - from_rational(1)
        # whatever survives must lie beyond the truncation order
        assert product.terms == ()

    @given(small_fractions(), small_fractions())
    def test_standard_embedding_is_a_homomorphism(self, p, q):
        assert from_rational(p) + from_rational(q) == from_rational(p + q)
        assert from_rational(p) * from_rational(q) == from_rational(p * q)


class TestOrder:
    def test_examples(self):
        assert compare(EPS, from_rational(Fraction(1, 10**6))) == -1
        assert compare(from_rational(1) / EPS, from_rational(10**9)) == 1
        assert compare(from_rational(3) + EPS, from_rational(3)) == 1

    def test_indeterminate(self):
        with pytest.raises(Indeterminate):
            compare(LCNum([], trunc=2), from_rational(0))

    generators = [from_rational(q) for q in (-2, Fraction(-1, 2), 0, 1, 3)] + [
        EPS, -EPS, monomial(1, 2), monomial(1, -1), monomial(-1, -1), from_rational(1) + EPS
    ]

    def test_order_compatibility_exhaustive(self):
        for a, b, c in itertools.product(self.generators, repeat=3):
            if compare(a, b) < 0:
                assert compare(a + c, b + c) < 0
        zero = from_rational(0)
        for a, b in itertools.product(self.generators, repeat=2):
            if compare(a, zero) > 0 and compare(b, zero) > 0:
                assert compare(a * b, zero) > 0

    @given(exact_numbers, exact_numbers, exact_numbers)
    def test_order_compatibility_random(self, a, b, c):
        if compare(a, b) < 0:
            assert compare(a + c, b + c) < 0
            if compare(c, from_rational(0)) > 0:
                assert compare(a * c, b * c) < 0

    @given(exact_numbers, exact_numbers)
    def test_trichotomy(self, a, b):
        assert compare(a, b) == -compare(b, a)

    @pytest.mark.parametrize("n", [1, 10, 10**6, 10**30])
    def test_unlimited_witness(self, n):
        big = from_rational(1) / EPS
        assert classify(big) == UNLIMITED
        assert compare(big, from_rational(n)) == 1


class TestClassification:
    def test_examples(self):
        assert classify(monomial(1, 2)) == INFINITESIMAL
        assert classify(from_rational(0)) == ZERO_CLASS
        assert classify(from_rational(2) + from_rational(1) / EPS) == UNLIMITED
        assert classify(from_rational(2) + EPS) == LIMITED_APPRECIABLE

    def test_shadow_examples(self):
        assert shadow(lc("3 + 1*eps^1 - 7*eps^2")) == 3
        assert shadow(EPS) == 0
        with pytest.raises(UnlimitedValue):
            shadow(from_rational(1) / EPS)

    def test_approx_examples(self):
        three = from_rational(3)
        assert approx(three + EPS, three)
        assert approx(three + EPS, three + 2 * EPS)
        assert not approx(three, from_rational(4))

    @given(limited_numbers, limited_numbers)
    def test_shadow_homomorphism(self, a, b):
        assert shadow(a + b) == shadow(a) + shadow(b)
        assert shadow(a * b) == shadow(a) * shadow(b)

    @given(limited_numbers, limited_numbers, limited_numbers)
    def test_approx_equivalence(self, a, b, c):
        assert approx(a, a)
        assert approx(a, b) == approx(b, a)
        if approx(a, b) and approx(b, c):
            assert approx(a, c)
        assert approx(a, from_rational(shadow(a)))

    @given(exact_numbers)
    def test_limited_iff_shadow_exists(self, a):
        if is_limited(a):
            shadow(a)
        else:
            with pytest.raises(UnlimitedValue):
                shadow(a)


class TestDecimalCoding:
    def test_examples(self):
        assert decimal_encode([1, 0, 1]) == Fraction(101, 1000)
        assert decimal_decode(Fraction(101, 1000), 3) == [1, 0, 1]
        assert decimal_encode([0, 0, 0]) == 0

    def test_exhaustive_round_trip(self):
        for n in range(13):
            for bits in itertools.product((0, 1), repeat=n):
                assert decimal_decode(decimal_encode(bits), n) == list(bits)

    @pytest.mark.parametrize("r", [Fraction(2, 10), Fraction(1, 3), Fraction(1), Fraction(-1, 10)])
    def test_decode_rejects(self, r):
        with pytest.raises(DecodeError):
            decimal_decode(r, 3)


class TestText:
    def test_format(self):
        assert format_lcnum(lc("3 + 1*eps^1 - 7/2*eps^2")) == "3 + 1*eps^1 - 7/2*eps^2"

    @given(exact_numbers)
    def test_round_trip(self, a):
        assert parse_lcnum(format_lcnum(a)) == a

    def test_round_trip_truncated(self):
        x = inverse(from_rational(2) + EPS)
        assert parse_lcnum(format_lcnum(x)) == x
        assert format_lcnum(x).endswith("O(eps^8)")
