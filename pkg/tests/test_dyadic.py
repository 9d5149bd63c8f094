"""Tests for maxleak.dyadic -- exact m * 2**-e arithmetic."""

from fractions import Fraction

import pytest

from maxleak.dyadic import ONE, ZERO, DyadicRational, dyadic_sum


def test_canonical_form():
    assert DyadicRational(4, 3) == DyadicRational(1, 1)
    assert DyadicRational(4, 3).mantissa == 1
    assert DyadicRational(4, 3).exponent == 1
    assert DyadicRational(0, 9).exponent == 0
    assert DyadicRational(3, -2) == DyadicRational(12, 0)


def test_negative_mantissa_rejected():
    with pytest.raises(ValueError):
        DyadicRational(-1, 0)


def test_arithmetic():
    half = DyadicRational(1, 1)
    quarter = DyadicRational.power_of_two(2)
    assert half + quarter == DyadicRational(3, 2)
    assert half * quarter == DyadicRational(1, 3)
    assert half + half == ONE
    assert 1 + ZERO == ONE


def test_ordering():
    assert DyadicRational(3, 2) < ONE
    assert DyadicRational(5, 2) > ONE
    assert max([DyadicRational(1, 3), DyadicRational(3, 3), DyadicRational(1, 2)]) == DyadicRational(3, 3)


def test_sum_is_order_independent():
    parts = [DyadicRational(1, e) for e in range(1, 20)] + [DyadicRational(1, 19)]
    assert dyadic_sum(parts) == ONE
    assert dyadic_sum(reversed(parts)) == ONE


def test_fraction_conversion():
    d = DyadicRational.from_fraction(Fraction(5, 8))
    assert d == DyadicRational(5, 3)
    assert d.to_fraction() == Fraction(5, 8)
    assert d == Fraction(5, 8)
    with pytest.raises(ValueError, match="not dyadic"):
        DyadicRational.from_fraction(Fraction(1, 3))


def test_hash_consistent_with_equality():
    assert hash(DyadicRational(2, 2)) == hash(DyadicRational(1, 1))
    assert len({DyadicRational(2, 2), DyadicRational(1, 1)}) == 1


def test_log2():
    assert DyadicRational(1, 5).log2() == -5
    assert DyadicRational(3, 0).log2() == pytest.approx(1.5849625)
    with pytest.raises(ValueError):
        ZERO.log2()


def test_log2_of_huge_mantissa():
    big = DyadicRational((1 << 2000) + 1, 2000)
    assert big.log2() == pytest.approx(0.0)


def test_json_round_trip():
    d = DyadicRational(7, 5)
    assert d.to_json() == {"mantissa": 7, "exponent": 5}
    assert DyadicRational.from_json(d.to_json()) == d


def test_str():
    assert str(DyadicRational(3, 2)) == "3/2^2"
    assert str(DyadicRational(6, 0)) == "6"
