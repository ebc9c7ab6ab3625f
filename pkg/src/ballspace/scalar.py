"""Exact arithmetic in Q(sqrt 2), extended by a single point +inf.

Every distance and function value in the package is an :class:`ExactScalar`.
Values are immutable, hashable and totally ordered; there is no floating
point anywhere on the comparison path.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

from .errors import DomainError, ParseError

__all__ = [
    "ExactScalar",
    "INF",
    "ZERO",
    "ONE",
    "SQRT2",
    "as_scalar",
    "parse_scalar",
    "smax",
    "smin",
]


def _sign_q2(a: Fraction, b: Fraction) -> int:
    """Sign of a + b*sqrt(2), decided without leaving the rationals."""
    if b == 0:
        return (a > 0) - (a < 0)
    if a == 0:
        return (b > 0) - (b < 0)
    if a > 0 and b > 0:
        return 1
    if a < 0 and b < 0:
        return -1
    # opposite signs: compare a^2 with 2 b^2 (never equal, sqrt 2 is irrational)
    if a > 0:
        return 1 if a * a > 2 * b * b else -1
    return 1 if 2 * b * b > a * a else -1


class ExactScalar:
    __slots__ = ("_a", "_b", "_inf", "_hash")

    def __init__(self, rational=0, sqrt2=0, *, infinite=False):
        if infinite:
            self._a = Fraction(0)
            self._b = Fraction(0)
            self._inf = True
        else:
            self._a = Fraction(rational)
            self._b = Fraction(sqrt2)
            self._inf = False
        self._hash = None

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction) -> "ExactScalar":
        obj = object.__new__(cls)
        obj._a = a
        obj._b = b
        obj._inf = False
        obj._hash = None
        return obj

    @classmethod
    def infinity(cls) -> "ExactScalar":
        return cls(infinite=True)

    # -- accessors -------------------------------------------------------

    @property
    def rational_part(self) -> Fraction:
        return self._a

    @property
    def sqrt2_part(self) -> Fraction:
        return self._b

    @property
    def is_infinite(self) -> bool:
        return self._inf

    @property
    def is_rational(self) -> bool:
        return not self._inf and self._b == 0

    def sign(self) -> int:
        if self._inf:
            return 1
        return _sign_q2(self._a, self._b)

    def conjugate(self) -> "ExactScalar":
        self._require_finite("conjugate")
        return ExactScalar._raw(self._a, -self._b)

    def _require_finite(self, what):
        if self._inf:
            raise DomainError(f"{what} is undefined for +inf")

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self._inf or other._inf:
            return INF
        return ExactScalar._raw(self._a + other._a, self._b + other._b)

    __radd__ = __add__

    def __neg__(self):
        self._require_finite("negation")
        return ExactScalar._raw(-self._a, -self._b)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other._inf:
            raise DomainError("subtracting +inf leaves the extended value domain")
        if self._inf:
            return INF
        return ExactScalar._raw(self._a - other._a, self._b - other._b)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other.__sub__(self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if self._inf or other._inf:
            finite = other if self._inf else self
            if finite._inf or finite.sign() > 0:
                return INF
            raise DomainError("+inf may only be scaled by a positive value")
        a, b, c, d = self._a, self._b, other._a, other._b
        if b == 0 and d == 0:
            return ExactScalar._raw(a * c, Fraction(0))
        return ExactScalar._raw(a * c + 2 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        if other._inf:
            raise DomainError("division by +inf is not supported")
        if other._a == 0 and other._b == 0:
            raise ZeroDivisionError("division by zero")
        if self._inf:
            if other.sign() > 0:
                return INF
            raise DomainError("+inf may only be divided by a positive value")
        if other._b == 0:
            return ExactScalar._raw(self._a / other._a, self._b / other._a)
        norm = other._a * other._a - 2 * other._b * other._b
        num = self * other.conjugate()
        return ExactScalar._raw(num._a / norm, num._b / norm)

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return other.__truediv__(self)

    def __pow__(self, exponent: int):
        if not isinstance(exponent, int) or exponent < 0:
            raise DomainError("only nonnegative integer powers are exact")
        result = ONE
        base = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __abs__(self):
        if self._inf:
            return self
        return -self if self.sign() < 0 else self

    # -- comparison ------------------------------------------------------

    def _cmp(self, other: "ExactScalar") -> int:
        if self._inf or other._inf:
            return (self._inf > other._inf) - (self._inf < other._inf)
        return _sign_q2(self._a - other._a, self._b - other._b)

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return False
        return self._inf == other._inf and self._a == other._a and self._b == other._b

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) < 0

    def __le__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) <= 0

    def __gt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) > 0

    def __ge__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return other
        return self._cmp(other) >= 0

    def __hash__(self):
        if self._hash is None:
            if self._inf:
                self._hash = hash(float("inf"))
            elif self._b == 0:
                self._hash = hash(self._a)
            else:
                self._hash = hash((self._a, self._b))
        return self._hash

    def __bool__(self):
        return self._inf or self._a != 0 or self._b != 0

    def __float__(self):
        if self._inf:
            return float("inf")
        return float(self._a) + float(self._b) * 2 ** 0.5

    # -- text ------------------------------------------------------------

    def __str__(self):
        return format_scalar(self)

    def __repr__(self):
        return f"ExactScalar({format_scalar(self)!r})"


def _coerce(value):
    if isinstance(value, ExactScalar):
        return value
    if isinstance(value, (int, Fraction)) or isinstance(value, Rational):
        return ExactScalar._raw(Fraction(value), Fraction(0))
    return NotImplemented


def as_scalar(value) -> ExactScalar:
    """Coerce ints, Fractions and grammar strings to :class:`ExactScalar`."""
    if isinstance(value, str):
        return parse_scalar(value)
    coerced = _coerce(value)
    if coerced is NotImplemented:
        raise TypeError(f"cannot interpret {value!r} as an exact scalar")
    return coerced


INF = ExactScalar.infinity()
ZERO = ExactScalar(0)
ONE = ExactScalar(1)
SQRT2 = ExactScalar(0, 1)


def smax(*values) -> ExactScalar:
    if len(values) == 1:
        values = tuple(values[0])
    best = None
    for v in values:
        v = as_scalar(v)
        if best is None or v > best:
            best = v
    if best is None:
        raise ValueError("smax() of an empty sequence")
    return best


def smin(*values) -> ExactScalar:
    if len(values) == 1:
        values = tuple(values[0])
    best = None
    for v in values:
        v = as_scalar(v)
        if best is None or v < best:
            best = v
    if best is None:
        raise ValueError("smin() of an empty sequence")
    return best


# ---------------------------------------------------------------------------
# literal grammar:  INT | INT/INT | [rational(+|-)][rational*]sqrt2 | inf

_RAT = r"[+-]?\d+(?:/\d+)?"
_LITERAL = re.compile(
    rf"^(?:(?P<rat>{_RAT})"
    rf"|(?:(?P<head>{_RAT})(?P<sign>[+-])|(?P<lead>[+-])?)(?:(?P<coef>\d+(?:/\d+)?)\*)?sqrt2)$"
)


def _fraction(text: str) -> Fraction:
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ZeroDivisionError
        return Fraction(int(num), int(den))
    return Fraction(int(text))


def parse_scalar(text: str, *, line=None, column=None) -> ExactScalar:
    """Parse a scalar literal such as ``3``, ``-2/5``, ``1/2+3/4*sqrt2`` or ``inf``."""
    token = text.strip()
    if token == "inf":
        return INF
    m = _LITERAL.match(token)
    if not token or m is None:
        raise ParseError(f"bad scalar literal {text!r}", line, column)
    try:
        if m.group("rat") is not None:
            return ExactScalar._raw(_fraction(m.group("rat")), Fraction(0))
        a = _fraction(m.group("head")) if m.group("head") else Fraction(0)
        b = _fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        if (m.group("sign") or m.group("lead")) == "-":
            b = -b
    except ZeroDivisionError:
        raise ParseError(f"zero denominator in {text!r}", line, column) from None
    return ExactScalar._raw(a, b)


def _format_fraction(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def format_scalar(value: ExactScalar) -> str:
    """Canonical literal; ``parse_scalar(format_scalar(v)) == v`` always."""
    if value.is_infinite:
        return "inf"
    a, b = value.rational_part, value.sqrt2_part
    if b == 0:
        return _format_fraction(a)
    coef = _format_fraction(abs(b))
    sign = "-" if b < 0 else "+"
    head = _format_fraction(a) if a != 0 else ""
    if not head and sign == "+":
        sign = ""
    return f"{head}{sign}{coef}*sqrt2"
