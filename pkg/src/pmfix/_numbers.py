"""Number parsing and formatting shared by the JSON interfaces.

Exact inputs (ints, ``"p/q"`` strings, decimal strings) become ``Fraction``;
JSON floats stay floats. ``"inf"`` maps to ``math.inf``.
"""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational, Real

INF = math.inf


def parse_number(value) -> Real:
    if isinstance(value, bool):
        raise TypeError(f"expected a number, got {value!r}")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", "+inf", "infinity"):
            return INF
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"not a number: {value!r}") from None
    raise TypeError(f"expected a number, got {value!r}")


def format_number(value):
    """JSON-safe form: ints stay ints, other rationals become ``"p/q"``."""
    if isinstance(value, bool):
        return value
    if isinstance(value, Rational):
        value = Fraction(value)
        if value.denominator == 1:
            return value.numerator
        return f"{value.numerator}/{value.denominator}"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return value
    return value


def is_exact(value) -> bool:
    return isinstance(value, Rational) or (isinstance(value, float) and math.isinf(value))


def parse_point(value):
    """Point identifiers: numeric-looking values become Fractions, anything else is kept."""
    if isinstance(value, (int, float, Fraction)) and not isinstance(value, bool):
        return parse_number(value)
    if isinstance(value, str):
        try:
            return parse_number(value)
        except ValueError:
            return value
    return value
