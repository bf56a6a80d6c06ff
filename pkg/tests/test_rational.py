import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from twospin.rational import (ValidationError, exp_enclosure, fmt_rational, log_enclosure,
                              log_value, parse_rational)


@pytest.mark.parametrize("s,q", [("3", Fraction(3)), ("7/10", Fraction(7, 10)), (" -2/4 ", Fraction(-1, 2)),
                                 ("119/500", Fraction(119, 500))])
def test_parse(s, q):
    assert parse_rational(s) == q


@pytest.mark.parametrize("s", ["0.5", "1e3", "1/0", "abc", "", "1//2"])
def test_parse_rejects(s):
    with pytest.raises(ValidationError):
        parse_rational(s)


def test_parse_rejects_float():
    with pytest.raises(ValidationError):
        parse_rational(0.5)


def test_fmt_always_has_denominator():
    assert fmt_rational(Fraction(5)) == "5/1"
    assert fmt_rational(Fraction(-6, 4)) == "-3/2"


@given(st.fractions(min_value=Fraction(1, 10**6), max_value=10**6))
def test_log_enclosure_brackets(q):
    lo, hi = log_enclosure(q)
    assert lo <= hi
    assert float(lo) <= math.log(q.numerator) - math.log(q.denominator) + 1e-12
    assert hi - lo < Fraction(1, 10**40)


@given(st.fractions(min_value=-50, max_value=50))
def test_exp_enclosure_brackets(q):
    lo, hi = exp_enclosure(q)
    assert 0 < lo <= hi
    assert hi - lo <= hi * Fraction(1, 10**40)


def test_log_exact_points():
    assert log_enclosure(1) == (0, 0)
    lo, hi = log_enclosure(Fraction(41, 40))
    assert lo < Fraction(41, 40) - 1 < hi + 1  # sanity
    assert abs(log_value(Fraction(41, 40)) - math.log(41 / 40)) < 1e-15
    with pytest.raises(ValidationError):
        log_enclosure(0)
    assert log_value(0) == float("-inf")


def test_exp_log_roundtrip():
    lo, hi = log_enclosure(7)
    elo, _ = exp_enclosure(lo)
    _, ehi = exp_enclosure(hi)
    assert elo <= 7 <= ehi
