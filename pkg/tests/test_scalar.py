import random
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from yperiod import scalar
from yperiod.errors import DivisionByZero, ZeroDenominator

fractions = st.fractions(max_denominator=10**6)
nonzero = fractions.filter(lambda q: q != 0)


def test_normalize_reduces():
    assert scalar.normalize(6, -4) == Fraction(-3, 2)
    q = scalar.normalize(6, -4)
    assert (q.numerator, q.denominator) == (-3, 2)


def test_normalize_zero_is_zero_over_one():
    q = scalar.normalize(0, 7)
    assert (q.numerator, q.denominator) == (0, 1)


def test_normalize_rejects_zero_denominator():
    with pytest.raises(ZeroDenominator):
        scalar.normalize(5, 0)


def test_arith_examples():
    assert scalar.arith("add", Fraction(1, 2), Fraction(1, 3)) == Fraction(5, 6)
    assert scalar.arith("mul", Fraction(-3, 2), Fraction(-2, 3)) == 1
    assert scalar.arith("sub", Fraction(1), Fraction(1, 4)) == Fraction(3, 4)
    with pytest.raises(DivisionByZero):
        scalar.arith("div", Fraction(1), Fraction(0))
    with pytest.raises(ValueError):
        scalar.arith("pow", Fraction(1), Fraction(2))


def test_division_by_zero_is_still_a_zero_division_error():
    with pytest.raises(ZeroDivisionError):
        scalar.arith("div", Fraction(3), Fraction(0))


def test_sample_positive_bound_one():
    assert scalar.sample_positive(random.Random(5), 1) == 1


def test_sample_positive_reproducible_and_in_range():
    a = [scalar.sample_positive(random.Random(42), 10) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    rng = random.Random(7)
    for _ in range(200):
        q = scalar.sample_positive(rng, 10)
        assert 0 < q <= 10
        assert q.numerator <= 10 and q.denominator <= 10


def test_sample_positive_rejects_bad_bound():
    with pytest.raises(ValueError):
        scalar.sample_positive(random.Random(0), 0)


def test_json_encoding_uses_strings():
    big = Fraction(3**80, 7**40)
    enc = scalar.to_json(big)
    assert enc == {"num": str(3**80), "den": str(7**40)}
    assert scalar.from_json(enc) == big
    assert scalar.from_json({"num": "4", "den": "-6"}) == Fraction(-2, 3)


@given(fractions, fractions, fractions)
def test_field_axioms(a, b, c):
    assert scalar.arith("add", a, b) == scalar.arith("add", b, a)
    assert scalar.arith("mul", a, scalar.arith("add", b, c)) == a * b + a * c
    assert (a + b) + c == a + (b + c)
    assert scalar.arith("sub", scalar.arith("add", a, b), b) == a


@given(nonzero, fractions)
def test_division_inverts_multiplication(a, b):
    assert scalar.arith("div", scalar.arith("mul", b, a), a) == b


@given(st.integers(), st.integers().filter(lambda d: d != 0))
def test_normalize_canonical_and_idempotent(num, den):
    q = scalar.normalize(num, den)
    assert scalar.is_canonical(q)
    assert scalar.normalize(q.numerator, q.denominator) == q
    assert q * den == num


@given(fractions)
def test_json_round_trip(q):
    assert scalar.from_json(scalar.to_json(q)) == q
