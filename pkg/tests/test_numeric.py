from fractions import Fraction

import pytest

from concave_pd.numeric import FLOAT, RATIONAL, backend_of, dump_number, eq, geq, leq, parse_number


def test_parse_rational_forms():
    assert parse_number("3/7") == Fraction(3, 7)
    assert parse_number(0.1) == Fraction(1, 10)
    assert parse_number(4) == 4
    assert isinstance(parse_number("1/2", FLOAT), float)


def test_parse_rejects_bad_values():
    with pytest.raises(TypeError):
        parse_number(True)
    with pytest.raises(ValueError):
        parse_number(float("inf"))


def test_dump_round_trip():
    for x in (Fraction(3, 7), Fraction(5), 2, 0.25):
        assert parse_number(dump_number(x), RATIONAL) == Fraction(x)
    assert dump_number(Fraction(6, 3)) == 2


def test_comparisons_exact_and_float():
    assert eq(Fraction(1, 3), Fraction(2, 6))
    assert not eq(Fraction(1, 3), Fraction(1, 3) + Fraction(1, 10**30))
    assert eq(0.1 + 0.2, 0.3)
    assert leq(1.0000000000001, 1.0)
    assert geq(1.0, 1.0000000000001)
    assert not leq(1.001, 1.0)


def test_backend_detection():
    assert backend_of([1, Fraction(1, 2)]) == RATIONAL
    assert backend_of([1, 0.5]) == FLOAT
