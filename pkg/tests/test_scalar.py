from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ballspace.errors import DomainError, ParseError
from ballspace.scalar import INF, ONE, SQRT2, ZERO, ExactScalar, as_scalar, format_scalar, parse_scalar, smax, smin

mpmath.mp.dps = 60

fracs = st.fractions(min_value=-50, max_value=50, max_denominator=40)
scalars = st.builds(ExactScalar, fracs, fracs)


def to_mp(s: ExactScalar):
    a, b = s.rational_part, s.sqrt2_part
    return mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(b.numerator) / b.denominator * mpmath.sqrt(2)


@given(scalars, scalars)
def test_order_matches_high_precision(x, y):
    dx, dy = to_mp(x), to_mp(y)
    if x == y:
        assert dx == dy
    else:
        # distinct elements of Q(sqrt2) with small coefficients differ by far more than 1e-50
        assert (x < y) == (dx < dy)
        assert abs(dx - dy) > mpmath.mpf(10) ** -50


@given(scalars, scalars, scalars)
def test_field_laws(x, y, z):
    assert (x + y) + z == x + (y + z)
    assert x * (y + z) == x * y + x * z
    assert (x - y) + y == x
    if y != 0:
        assert (x / y) * y == x


@given(scalars)
def test_sign_and_abs(x):
    assert x.sign() == (0 if x == 0 else (1 if x > 0 else -1))
    assert abs(x) >= 0
    assert abs(x) == abs(-x)
    assert hash(x) == hash(ExactScalar(x.rational_part, x.sqrt2_part))


@given(scalars)
def test_literal_round_trip(x):
    assert parse_scalar(format_scalar(x)) == x


def test_sqrt2_squared_is_two():
    assert SQRT2 * SQRT2 == 2
    assert (1 + SQRT2) * (SQRT2 - 1) == 1
    assert 1 / (1 + SQRT2) == SQRT2 - 1


def test_close_comparisons():
    # consecutive continued-fraction convergents bracket sqrt2
    assert as_scalar(Fraction(140, 99)) < SQRT2 < as_scalar(Fraction(99, 70))
    assert as_scalar(Fraction(816, 577)) < SQRT2 < as_scalar(Fraction(577, 408))
    assert ExactScalar(Fraction(665857, 470832)) > SQRT2


def test_infinity():
    assert INF > ExactScalar(10**9, 10**9)
    assert INF + 3 == INF
    assert INF.is_infinite and not ONE.is_infinite
    assert smax(ONE, INF) == INF and smin(ONE, INF) == ONE
    with pytest.raises(DomainError):
        INF - INF


def test_equality_with_plain_numbers():
    assert ExactScalar(3) == 3
    assert as_scalar(Fraction(1, 2)) == Fraction(1, 2)
    assert ZERO == 0 and not ZERO


@pytest.mark.parametrize(
    "text,expected",
    [
        ("3", ExactScalar(3)),
        ("-2/5", ExactScalar(Fraction(-2, 5))),
        ("3/2+1/1*sqrt2", ExactScalar(Fraction(3, 2), 1)),
        ("1*sqrt2", SQRT2),
        ("-1/2*sqrt2", ExactScalar(0, Fraction(-1, 2))),
        ("1-1*sqrt2", ExactScalar(1, -1)),
        ("sqrt2", SQRT2),
        ("1/10*sqrt2", ExactScalar(0, Fraction(1, 10))),
        ("inf", INF),
    ],
)
def test_parse_literals(text, expected):
    assert parse_scalar(text) == expected


@pytest.mark.parametrize("text", ["", "2sqrt2", "1/0", "1.5", "+inf x", "1+-1*sqrt2", "1/2*sqrt2+1"])
def test_parse_rejects(text):
    with pytest.raises(ParseError):
        parse_scalar(text)


def test_format():
    assert format_scalar(ExactScalar(Fraction(3, 2), 1)) == "3/2+1*sqrt2"
    assert format_scalar(ExactScalar(0, -1)) == "-1*sqrt2"
    assert format_scalar(INF) == "inf"
    assert format_scalar(ZERO) == "0"
