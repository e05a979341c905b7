import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dpspec.exact import (
    INF,
    ExactReal,
    bounds,
    certainly_le,
    ext_add,
    ext_mul,
    format_value,
    is_inf,
    parse_value,
    to_extreal,
    to_fraction,
)

ln = ExactReal.log


def test_log_products_collapse():
    assert str(ln(3) + ln(2)) == "ln(6)"
    assert ln(3) + ln(2) == ln(6)
    assert ln(4) == ln(2) * 2
    assert (ln(6) - ln(2)) == ln(3)


def test_zero_and_signs():
    assert ln(1).is_zero
    assert (ln(8) - ln(2) * 3).is_zero
    assert (ln(3) - 1).sign() == 1
    assert (ln(2) - 1).sign() == -1
    assert ln(Fraction(1, 2)).sign() == -1


@pytest.mark.parametrize(
    "text, expected",
    [
        ("ln(3)", ln(3)),
        ("ln(6)/2", ln(6) / 2),
        ("1/2 + ln(6)/2", ExactReal(Fraction(1, 2)) + ln(6) / 2),
        ("0.25", ExactReal(Fraction(1, 4))),
        ("2*ln(3)", ln(9)),
    ],
)
def test_parse_value(text, expected):
    assert parse_value(text) == expected


def test_parse_inf_and_roundtrip():
    assert is_inf(parse_value("inf"))
    for v in (ln(3), ln(6) / 2, ExactReal(Fraction(1, 2)) + ln(6) / 2, ExactReal(Fraction(7, 3))):
        assert parse_value(str(v)) == v


def test_format_value():
    assert format_value(ln(3)) == "ln(3) ≈ 1.098612"
    assert format_value(INF) == "inf"
    assert format_value(ExactReal(Fraction(1, 3))).startswith("1/3")


def test_extended_arithmetic():
    assert ext_add(ln(3), INF) == INF
    assert ext_mul(0, INF) == 0
    assert ext_mul(INF, ExactReal(0)) == 0
    assert ext_mul(ln(2), INF) == INF
    assert ext_add(ln(3), ln(2)) == ln(6)


def test_floats_read_by_decimal_repr():
    assert to_fraction(0.1) == Fraction(1, 10)
    assert to_extreal(1.0) == 1


def test_certainly_le_is_strict_about_uncertainty():
    assert certainly_le(ln(3), ln(3))
    assert certainly_le(ln(3), INF)
    assert not certainly_le(INF, ln(3))
    assert not certainly_le(ln(3), 1)


@settings(max_examples=200, deadline=None)
@given(st.integers(2, 500), st.integers(2, 500))
def test_log_ordering_matches_integers(a, b):
    assert (ln(a) < ln(b)) == (a < b)
    assert (ln(a) == ln(b)) == (a == b)


@settings(max_examples=200, deadline=None)
@given(
    st.fractions(min_value=-5, max_value=5, max_denominator=20),
    st.lists(st.tuples(st.integers(2, 60), st.fractions(min_value=-3, max_value=3, max_denominator=6)), max_size=4),
)
def test_enclosure_contains_float_value(c, terms):
    x = ExactReal(c)
    approx = float(c)
    for base, k in terms:
        x = x + ln(base) * k
        approx += float(k) * math.log(base)
    lo, hi = bounds(x)
    assert float(lo) - 1e-9 <= approx <= float(hi) + 1e-9
    assert parse_value(str(x)) == x
