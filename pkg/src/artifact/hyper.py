"""Exact arithmetic in a truncated Levi-Civita field.

An :class:`LCNum` is a finite sum ``c_1*eps^q_1 + ... + c_n*eps^q_n`` with
rational coefficients and strictly increasing rational exponents, optionally
followed by an error term ``O(eps^t)``.  The positive infinitesimal ``eps``
is smaller than every positive rational, so the order is lexicographic on the
leading term.

Everything is exact: coefficients and exponents are :class:`fractions.Fraction`
and truncation only happens where a geometric series has to be cut off.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import (
    DecodeError,
    DivisionByZero,
    Indeterminate,
    InputSyntaxError,
    TruncationExhausted,
    UnlimitedValue,
)

DEFAULT_ORDER = Fraction(8)

ZERO_CLASS = "zero"
INFINITESIMAL = "infinitesimal"
LIMITED_APPRECIABLE = "limited_appreciable"
UNLIMITED = "unlimited"

Rationalish = int | Fraction


def _q(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"expected an exact rational, got {type(value).__name__}")


class LCNum:
    """Immutable element of the truncated Levi-Civita field."""

    __slots__ = ("terms", "trunc")

    terms: tuple[tuple[Fraction, Fraction], ...]
    trunc: Fraction | None

    def __init__(self, terms: Iterable[tuple[Rationalish, Rationalish]] = (), trunc: Rationalish | None = None):
        cut = None if trunc is None else _q(trunc)
        acc: dict[Fraction, Fraction] = {}
        for exponent, coefficient in terms:
            e = _q(exponent)
            acc[e] = acc.get(e, Fraction(0)) + _q(coefficient)
        kept = tuple(
            (e, c) for e, c in sorted(acc.items()) if c != 0 and (cut is None or e < cut)
        )
        object.__setattr__(self, "terms", kept)
        object.__setattr__(self, "trunc", cut)

    def __setattr__(self, name, value):
        raise AttributeError("LCNum is immutable")

    @classmethod
    def _raw(cls, terms: tuple, trunc: Fraction | None) -> "LCNum":
        obj = object.__new__(cls)
        object.__setattr__(obj, "terms", terms)
        object.__setattr__(obj, "trunc", trunc)
        return obj

    # construction -------------------------------------------------------
    @classmethod
    def coerce(cls, value) -> "LCNum":
        if isinstance(value, LCNum):
            return value
        return from_rational(value)

    # structural queries -------------------------------------------------
    def is_exact_zero(self) -> bool:
        return not self.terms and self.trunc is None

    def leading(self) -> tuple[Fraction, Fraction] | None:
        return self.terms[0] if self.terms else None

    def valuation(self) -> Fraction | None:
        """Leading exponent; for a term-less truncated value, its cutoff; None for exact 0."""
        if self.terms:
            return self.terms[0][0]
        return self.trunc

    def coefficient(self, exponent: Rationalish) -> Fraction:
        e = _q(exponent)
        if self.trunc is not None and e >= self.trunc:
            raise Indeterminate(f"coefficient of eps^{e} lies beyond the truncation order {self.trunc}")
        for ex, c in self.terms:
            if ex == e:
                return c
        return Fraction(0)

    def is_standard(self) -> bool:
        return self.trunc is None and all(e == 0 for e, _ in self.terms)

    def to_rational(self) -> Fraction:
        if not self.is_standard():
            raise ValueError(f"{self} is not a standard rational")
        return self.terms[0][1] if self.terms else Fraction(0)

    # arithmetic ---------------------------------------------------------
    def __neg__(self) -> "LCNum":
        return LCNum._raw(tuple((e, -c) for e, c in self.terms), self.trunc)

    def __pos__(self) -> "LCNum":
        return self

    def __add__(self, other) -> "LCNum":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other) -> "LCNum":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return add(self, -other)

    def __rsub__(self, other) -> "LCNum":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return add(other, -self)

    def __mul__(self, other) -> "LCNum":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "LCNum":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return div(self, other)

    def __rtruediv__(self, other) -> "LCNum":
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return div(other, self)

    def __pow__(self, n: int) -> "LCNum":
        if not isinstance(n, int):
            return NotImplemented
        return int_pow(self, n)

    def __abs__(self) -> "LCNum":
        return -self if sign(self) < 0 else self

    # order --------------------------------------------------------------
    def __lt__(self, other) -> bool:
        return compare(self, LCNum.coerce(other)) < 0

    def __le__(self, other) -> bool:
        return compare(self, LCNum.coerce(other)) <= 0

    def __gt__(self, other) -> bool:
        return compare(self, LCNum.coerce(other)) > 0

    def __ge__(self, other) -> bool:
        return compare(self, LCNum.coerce(other)) >= 0

    # identity -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        if not isinstance(other, LCNum):
            return NotImplemented
        return self.terms == other.terms and self.trunc == other.trunc

    def __hash__(self) -> int:
        return hash((self.terms, self.trunc))

    def __repr__(self) -> str:
        return f"LCNum({format_lcnum(self)!r})"

    def __str__(self) -> str:
        return format_lcnum(self)


def _coerce_or_none(value) -> LCNum | None:
    if isinstance(value, LCNum):
        return value
    if isinstance(value, (int, Fraction)) and not isinstance(value, bool):
        return from_rational(value)
    return None


def _min_cut(*cuts: Fraction | None) -> Fraction | None:
    present = [c for c in cuts if c is not None]
    return min(present) if present else None


def from_rational(r: Rationalish) -> LCNum:
    r = _q(r)
    return LCNum._raw(((Fraction(0), r),) if r else (), None)


def epsilon() -> LCNum:
    return LCNum._raw(((Fraction(1), Fraction(1)),), None)


def monomial(coefficient: Rationalish, exponent: Rationalish) -> LCNum:
    return LCNum([(exponent, coefficient)])


ZERO = LCNum()
ONE = from_rational(1)
EPS = epsilon()


def truncate(a: LCNum, order: Rationalish) -> LCNum:
    """Forget every term at or beyond ``eps^order``."""
    return LCNum(a.terms, _min_cut(a.trunc, _q(order)))


def add(a: LCNum, b: LCNum) -> LCNum:
    trunc = _min_cut(a.trunc, b.trunc)
    return LCNum(list(a.terms) + list(b.terms), trunc)


def sub(a: LCNum, b: LCNum) -> LCNum:
    return add(a, -b)


def mul(a: LCNum, b: LCNum) -> LCNum:
    if a.is_exact_zero() or b.is_exact_zero():
        return ZERO
    va, vb = a.valuation(), b.valuation()
    cut_a = None if a.trunc is None else a.trunc + vb
    cut_b = None if b.trunc is None else b.trunc + va
    trunc = _min_cut(cut_a, cut_b)
    acc: dict[Fraction, Fraction] = {}
    for ea, ca in a.terms:
        for eb, cb in b.terms:
            e = ea + eb
            if trunc is not None and e >= trunc:
                continue
            acc[e] = acc.get(e, Fraction(0)) + ca * cb
    return LCNum(acc.items(), trunc)


def inverse(b: LCNum, order: Rationalish = DEFAULT_ORDER) -> LCNum:
    """Multiplicative inverse; non-monomial divisors expand a geometric series below ``order``."""
    if b.is_exact_zero():
        raise DivisionByZero("division by exact zero")
    if not b.terms:
        raise TruncationExhausted(f"divisor {b} has no known leading term")
    order = _q(order)
    e0, c0 = b.terms[0]
    rest = [(e - e0, c / c0) for e, c in b.terms[1:]]
    if not rest and b.trunc is None:
        return LCNum._raw(((-e0, 1 / c0),), None)
    cut = order if rest else None
    if b.trunc is not None:
        cut = _min_cut(cut, b.trunc - 2 * e0)
    if cut <= -e0:
        raise TruncationExhausted(f"inverse of {b} has no terms below eps^{cut}")
    rel_cut = cut + e0
    u = LCNum([(e, -c) for e, c in rest], rel_cut)
    total = LCNum([(0, 1)], rel_cut)
    power = LCNum([(0, 1)], rel_cut)
    while True:
        power = truncate(mul(power, u), rel_cut)
        if not power.terms:
            break
        total = add(total, power)
    return LCNum([(e - e0, c / c0) for e, c in total.terms], cut)


def div(a: LCNum, b: LCNum, order: Rationalish = DEFAULT_ORDER) -> LCNum:
    if b.is_exact_zero():
        raise DivisionByZero("division by exact zero")
    if a.is_exact_zero():
        return ZERO
    return mul(a, inverse(b, order))


def int_pow(a: LCNum, n: int, order: Rationalish = DEFAULT_ORDER) -> LCNum:
    if n < 0:
        return int_pow(inverse(a, order), -n, order)
    result = ONE
    base = a
    while n:
        if n & 1:
            result = mul(result, base)
        n >>= 1
        if n:
            base = mul(base, base)
    return result


_OPS = {"add": add, "sub": sub, "mul": mul}


def field_arith(a: LCNum, b, op: str, order: Rationalish = DEFAULT_ORDER) -> LCNum:
    """Dispatch one of ``add, sub, mul, div, int_pow``; for ``int_pow`` ``b`` is the integer exponent."""
    if op in _OPS:
        return _OPS[op](a, LCNum.coerce(b))
    if op == "div":
        return div(a, LCNum.coerce(b), order)
    if op == "int_pow":
        if not isinstance(b, int):
            raise TypeError("int_pow needs an integer exponent")
        return int_pow(a, b, order)
    raise ValueError(f"unknown operation {op!r}")


# order and classification ---------------------------------------------------

def sign(a: LCNum) -> int:
    if a.terms:
        return 1 if a.terms[0][1] > 0 else -1
    if a.trunc is None:
        return 0
    raise Indeterminate(f"sign of a value known only up to O(eps^{a.trunc})")


def compare(a: LCNum, b: LCNum) -> int:
    """Return -1, 0 or 1; raises :class:`Indeterminate` if truncation hides the answer."""
    return sign(sub(LCNum.coerce(a), LCNum.coerce(b)))


def classify(a: LCNum) -> str:
    if a.terms:
        lead = a.terms[0][0]
        if lead > 0:
            return INFINITESIMAL
        if lead == 0:
            return LIMITED_APPRECIABLE
        return UNLIMITED
    if a.trunc is None:
        return ZERO_CLASS
    raise Indeterminate(f"value is O(eps^{a.trunc}); zero and infinitesimal cannot be told apart")


def is_limited(a: LCNum) -> bool:
    return classify(a) != UNLIMITED


def shadow(a: LCNum) -> Fraction:
    if a.terms and a.terms[0][0] < 0:
        raise UnlimitedValue(f"{a} is unlimited and has no shadow")
    if a.trunc is not None and a.trunc <= 0:
        raise Indeterminate(f"shadow of {a} is hidden by truncation")
    for e, c in a.terms:
        if e == 0:
            return c
    return Fraction(0)


def approx(a, b) -> bool:
    """True iff ``a - b`` is zero or infinitesimal."""
    d = sub(LCNum.coerce(a), LCNum.coerce(b))
    if d.terms:
        return d.terms[0][0] > 0
    if d.trunc is None or d.trunc > 0:
        return True
    raise Indeterminate(f"difference is O(eps^{d.trunc})")


# decimal coding of bit sequences --------------------------------------------

def decimal_encode(bits: Sequence[int]) -> Fraction:
    total = Fraction(0)
    for n, b in enumerate(bits):
        if b not in (0, 1):
            raise ValueError(f"bit {n} is {b!r}, expected 0 or 1")
        if b:
            total += Fraction(1, 10 ** (n + 1))
    return total


def decimal_decode(r: Rationalish, n: int) -> list[int]:
    r = _q(r)
    if r < 0 or r >= 1:
        raise DecodeError(f"{r} is outside [0, 1)")
    bits = []
    for place in range(n):
        r *= 10
        digit = r.numerator // r.denominator
        if digit not in (0, 1):
            raise DecodeError(f"decimal place {place + 1} holds digit {digit}")
        bits.append(digit)
        r -= digit
    return bits


# text form -------------------------------------------------------------------

def _fmt_q(q: Fraction) -> str:
    return str(q)


def format_lcnum(a: LCNum) -> str:
    pieces: list[str] = []
    for e, c in a.terms:
        body = _fmt_q(abs(c)) if e == 0 else f"{_fmt_q(abs(c))}*eps^{_fmt_q(e)}"
        if not pieces:
            pieces.append(("-" if c < 0 else "") + body)
        else:
            pieces.append(("- " if c < 0 else "+ ") + body)
    if a.trunc is not None:
        tail = f"O(eps^{_fmt_q(a.trunc)})"
        pieces.append(tail if not pieces else "+ " + tail)
    return " ".join(pieces) if pieces else "0"


_TOKEN = re.compile(r"\s*(?:(\d+)|(eps)|(O)|([-+*/^()]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise InputSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start(m.lastindex)
        kind = ("int", "eps", "O", "op")[m.lastindex - 1]
        tokens.append((kind, m.group(m.lastindex), start))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def accept(self, value: str) -> bool:
        if self.peek()[1] == value and self.peek()[0] in ("op", "eps", "O"):
            self.i += 1
            return True
        return False

    def expect(self, value: str) -> None:
        if not self.accept(value):
            kind, val, pos = self.peek()
            raise InputSyntaxError(f"expected {value!r}, found {val or 'end of input'!r}", pos, self.text)

    def rational(self, allow_sign: bool = False) -> Fraction:
        negative = False
        if allow_sign and self.accept("-"):
            negative = True
        kind, val, pos = self.take()
        if kind != "int":
            raise InputSyntaxError(f"expected a number, found {val or 'end of input'!r}", pos, self.text)
        value = Fraction(int(val))
        if self.peek() == ("op", "/", self.peek()[2]) and self.tokens[self.i + 1][0] == "int":
            self.take()
            den = int(self.take()[1])
            if den == 0:
                raise InputSyntaxError("zero denominator", pos, self.text)
            value /= den
        return -value if negative else value

    def exponent(self) -> Fraction:
        if self.accept("("):
            q = self.rational(allow_sign=True)
            self.expect(")")
            return q
        return self.rational(allow_sign=True)


def parse_lcnum(text: str) -> LCNum:
    """Parse the text form written by :func:`format_lcnum` (and light variations)."""
    r = _Reader(text)
    terms: list[tuple[Fraction, Fraction]] = []
    trunc: Fraction | None = None
    first = True
    while True:
        negative = False
        if r.accept("-"):
            negative = True
        elif not first:
            if not r.accept("+"):
                kind, val, pos = r.peek()
                raise InputSyntaxError(f"expected '+' or '-', found {val!r}", pos, text)
            if r.accept("-"):
                negative = True
        first = False
        kind, val, pos = r.peek()
        if kind == "O":
            r.take()
            r.expect("(")
            r.expect("eps")
            r.expect("^")
            cut = r.exponent()
            r.expect(")")
            if trunc is not None:
                raise InputSyntaxError("more than one truncation term", pos, text)
            trunc = cut
        else:
            coefficient = Fraction(1)
            exponent = Fraction(0)
            if kind == "int":
                coefficient = r.rational()
                if r.accept("*"):
                    r.expect("eps")
                    exponent = r.exponent() if r.accept("^") else Fraction(1)
            elif kind == "eps":
                r.take()
                exponent = r.exponent() if r.accept("^") else Fraction(1)
            else:
                raise InputSyntaxError(f"unexpected {val or 'end of input'!r}", pos, text)
            terms.append((exponent, -coefficient if negative else coefficient))
        if r.peek()[0] == "end":
            break
    if trunc is not None and any(e >= trunc for e, _ in terms):
        raise InputSyntaxError("term at or beyond the truncation order", None, text)
    return LCNum(terms, trunc)
