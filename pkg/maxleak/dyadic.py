"""Exact dyadic rationals m * 2**-e.

Every channel probability induced by uniform key bits has this form, so sums,
maxima and comparisons stay exact; only the final log2 is a float.
"""

import math
import numbers
from fractions import Fraction
from functools import total_ordering
from typing import Iterable, Tuple, Union

_Other = Union["DyadicRational", int]


@total_ordering
class DyadicRational:
    """A nonnegative number mantissa * 2**-exponent in canonical form.

    Canonical form: mantissa odd (or zero with exponent 0), exponent >= 0 and
    minimal. Equal values therefore have equal (mantissa, exponent) pairs.
    """

    __slots__ = ("_mantissa", "_exponent")

    def __init__(self, mantissa: int = 0, exponent: int = 0):
        if mantissa < 0:
            raise ValueError(f"mantissa must be nonnegative, got {mantissa}")
        if exponent < 0:
            mantissa <<= -exponent
            exponent = 0
        if mantissa == 0:
            exponent = 0
        else:
            shift = min((mantissa & -mantissa).bit_length() - 1, exponent)
            mantissa >>= shift
            exponent -= shift
        self._mantissa = mantissa
        self._exponent = exponent

    @property
    def mantissa(self) -> int:
        return self._mantissa

    @property
    def exponent(self) -> int:
        return self._exponent

    @classmethod
    def power_of_two(cls, e: int) -> "DyadicRational":
        """2**-e."""
        return cls(1, e)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "DyadicRational":
        den = value.denominator
        if den & (den - 1):
            raise ValueError(f"{value} is not dyadic")
        return cls(value.numerator, den.bit_length() - 1)

    def to_fraction(self) -> Fraction:
        return Fraction(self._mantissa, 1 << self._exponent)

    def _align(self, other: "DyadicRational") -> Tuple[int, int, int]:
        e = max(self._exponent, other._exponent)
        return (
            self._mantissa << (e - self._exponent),
            other._mantissa << (e - other._exponent),
            e,
        )

    @staticmethod
    def _coerce(other: object) -> "DyadicRational":
        if isinstance(other, DyadicRational):
            return other
        if isinstance(other, numbers.Integral):
            return DyadicRational(int(other), 0)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: _Other) -> "DyadicRational":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        a, b, e = self._align(o)
        return DyadicRational(a + b, e)

    __radd__ = __add__

    def __mul__(self, other: _Other) -> "DyadicRational":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return DyadicRational(self._mantissa * o._mantissa, self._exponent + o._exponent)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Fraction):
            return self.to_fraction() == other
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return (self._mantissa, self._exponent) == (o._mantissa, o._exponent)

    def __lt__(self, other: _Other) -> bool:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        a, b, _ = self._align(o)
        return a < b

    def __hash__(self) -> int:
        return hash(self.to_fraction())

    def __bool__(self) -> bool:
        return self._mantissa != 0

    def __float__(self) -> float:
        return float(self.to_fraction())

    def log2(self) -> float:
        """log2 of the value; math.log2 accepts arbitrarily large ints."""
        if self._mantissa == 0:
            raise ValueError("log2 of zero")
        return math.log2(self._mantissa) - self._exponent

    def __repr__(self) -> str:
        return f"DyadicRational({self._mantissa}, {self._exponent})"

    def __str__(self) -> str:
        if self._exponent == 0:
            return str(self._mantissa)
        return f"{self._mantissa}/2^{self._exponent}"

    def to_json(self) -> dict:
        return {"mantissa": self._mantissa, "exponent": self._exponent}

    @classmethod
    def from_json(cls, data: dict) -> "DyadicRational":
        return cls(int(data["mantissa"]), int(data["exponent"]))


ZERO = DyadicRational(0)
ONE = DyadicRational(1)


def dyadic_sum(values: Iterable[DyadicRational]) -> DyadicRational:
    """Exact sum, independent of order."""
    total = ZERO
    for v in values:
        total = total + v
    return total
