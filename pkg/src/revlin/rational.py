"""Text form of exact rationals.

Values themselves are :class:`fractions.Fraction`, which is always kept in
lowest terms with a positive denominator.
"""

from __future__ import annotations

import re
from decimal import Decimal
from fractions import Fraction

from .errors import ParseError

Rational = Fraction

_INT_OR_FRAC = re.compile(r"[+-]?\d+(?:/\d+)?")
_DECIMAL = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+)")


def parse_rational(text: str | int | Fraction) -> Fraction:
    """Parse ``"7"``, ``"7/3"`` or a finite decimal such as ``"1.25"``."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, int):
        return Fraction(text)
    s = text.strip()
    if _INT_OR_FRAC.fullmatch(s):
        try:
            return Fraction(s)
        except ZeroDivisionError:
            raise ParseError(f"zero denominator in {text!r}") from None
    if _DECIMAL.fullmatch(s):
        return Fraction(Decimal(s))
    raise ParseError(f"not a rational: {text!r}")


def format_rational(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Fraction, digits: int) -> str:
    """Rounded decimal rendering (approximate, for humans)."""
    q = Fraction(1, 10**digits)
    rounded = round(value / q) * q
    sign = "-" if rounded < 0 else ""
    rounded = abs(rounded)
    whole, frac = divmod(rounded.numerator * 10**digits // rounded.denominator, 10**digits)
    if digits == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{digits}d}"


def bit_size(value: Fraction) -> int:
    """Largest of the numerator and denominator bit lengths."""
    return max(value.numerator.bit_length(), value.denominator.bit_length())
