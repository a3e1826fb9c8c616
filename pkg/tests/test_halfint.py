from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from maxineq.halfint import HalfInt

ints = st.integers(-10**6, 10**6)


def test_str_and_repr():
    assert str(HalfInt(3)) == "3/2"
    assert str(HalfInt(-4)) == "-2"
    assert repr(HalfInt(1)) == "HalfInt(1/2)"


def test_from_number():
    assert HalfInt.from_number(Fraction(-5, 2)) == HalfInt(-5)
    assert HalfInt.from_number(2) == 2
    with pytest.raises(ValueError):
        HalfInt.from_number(Fraction(1, 3))
    with pytest.raises(TypeError):
        HalfInt(True)


def test_immutable():
    h = HalfInt(1)
    with pytest.raises(AttributeError):
        h.doubled = 3


@given(ints, ints)
def test_additive_group(a, b):
    x, y = HalfInt(a), HalfInt(b)
    assert (x + y).doubled == a + b
    assert x - y == -(y - x)
    assert x + 0 == x and 1 + x == HalfInt(a + 2)


@given(ints, st.integers(-50, 50))
def test_integer_scaling(a, k):
    assert (HalfInt(a) * k).as_fraction() == Fraction(a, 2) * k


@given(ints, ints)
def test_order_and_hash_match_fractions(a, b):
    x, y = HalfInt(a), HalfInt(b)
    assert (x < y) == (Fraction(a, 2) < Fraction(b, 2))
    assert (x == y) == (hash(x) == hash(y)) or x != y
    assert float(x) == a / 2
    assert x.is_integer == (a % 2 == 0)
