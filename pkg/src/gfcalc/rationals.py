"""Helpers for exact rational scalars.

Every exact quantity in this package is a ``fractions.Fraction``.  The wire
format writes rationals as strings ("3/2", "-1", "0") so that JSON round trips
never lose precision.
"""

from __future__ import annotations

from fractions import Fraction


def as_fraction(value) -> Fraction:
    """Coerce ints, strings like "num/den", and Fractions to Fraction.

    Floats are rejected: callers that want numerics must opt in explicitly.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"not an exact rational: {value!r}")


def frac_str(value: Fraction) -> str:
    """Render a Fraction in the wire format ("3/2", "-1")."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"
