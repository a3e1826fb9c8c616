"""Exact half-integers."""
from __future__ import annotations

from fractions import Fraction
from functools import total_ordering
from numbers import Rational


@total_ordering
class HalfInt:
    """An element of ``(1/2) Z`` stored as twice its value.

    >>> HalfInt(3), HalfInt.from_number(2)
    (HalfInt(3/2), HalfInt(2))
    """

    __slots__ = ("doubled",)

    def __init__(self, doubled: int):
        if isinstance(doubled, bool) or int(doubled) != doubled:
            raise TypeError(f"doubled value must be an integer, got {doubled!r}")
        object.__setattr__(self, "doubled", int(doubled))

    def __setattr__(self, name, value):
        raise AttributeError("HalfInt is immutable")

    @classmethod
    def from_number(cls, x) -> "HalfInt":
        if isinstance(x, HalfInt):
            return x
        d = Fraction(x) * 2
        if d.denominator != 1:
            raise ValueError(f"{x!r} is not a half-integer")
        return cls(d.numerator)

    @staticmethod
    def _doubled_of(other):
        if isinstance(other, HalfInt):
            return other.doubled
        if isinstance(other, int):
            return 2 * other
        if isinstance(other, Rational):
            d = Fraction(other) * 2
            return d.numerator if d.denominator == 1 else None
        return None

    # arithmetic
    def __add__(self, other):
        d = self._doubled_of(other)
        return NotImplemented if d is None else HalfInt(self.doubled + d)

    __radd__ = __add__

    def __sub__(self, other):
        d = self._doubled_of(other)
        return NotImplemented if d is None else HalfInt(self.doubled - d)

    def __rsub__(self, other):
        d = self._doubled_of(other)
        return NotImplemented if d is None else HalfInt(d - self.doubled)

    def __neg__(self):
        return HalfInt(-self.doubled)

    def __mul__(self, other):
        if isinstance(other, int) and not isinstance(other, bool):
            return HalfInt(self.doubled * other)
        return NotImplemented

    __rmul__ = __mul__

    # comparison
    def __eq__(self, other):
        if isinstance(other, float):
            return float(self) == other
        d = self._doubled_of(other)
        return False if d is None else self.doubled == d

    def __lt__(self, other):
        if isinstance(other, float):
            return float(self) < other
        d = self._doubled_of(other)
        if d is None:
            return NotImplemented
        return self.doubled < d

    def __hash__(self):
        return hash(Fraction(self.doubled, 2))

    # conversion
    def __float__(self):
        return self.doubled / 2.0

    def as_fraction(self) -> Fraction:
        return Fraction(self.doubled, 2)

    @property
    def is_integer(self) -> bool:
        return self.doubled % 2 == 0

    def __str__(self):
        if self.doubled % 2 == 0:
            return str(self.doubled // 2)
        return f"{self.doubled}/2"

    def __repr__(self):
        return f"HalfInt({self})"
