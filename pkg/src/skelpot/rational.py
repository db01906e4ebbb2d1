"""Exact rational parsing/formatting used by all JSON interfaces.

Rationals travel as strings "p/q" (reduced, no leading '+') or bare
integers.  Decimal strings like "0.5000001" are parsed exactly as scaled
integers, never through floats.
"""

from __future__ import annotations

import re
from fractions import Fraction

_DECIMAL_RE = re.compile(r"^-?\d+\.\d+$")
_FRACTION_RE = re.compile(r"^-?\d+(/\d+)?$")


class RationalParseError(ValueError):
    pass


def parse_rational(value) -> Fraction:
    """Parse an int, "p/q" string, or exact decimal string into a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        s = value.strip()
        if _FRACTION_RE.match(s):
            try:
                return Fraction(s)
            except ZeroDivisionError as exc:
                raise RationalParseError(
                    f"zero denominator: {value!r}") from exc
        if _DECIMAL_RE.match(s):
            whole, frac = s.split(".")
            sign = -1 if whole.startswith("-") else 1
            whole_i = int(whole)
            return Fraction(whole_i) + sign * Fraction(int(frac), 10 ** len(frac))
        raise RationalParseError(f"not a rational literal: {value!r}")
    raise RationalParseError(f"not a rational literal: {value!r}")


def format_rational(x: Fraction) -> str:
    """Canonical form: reduced fraction, '-' sign only, no denominator 1."""
    x = Fraction(x)
    return str(x)
