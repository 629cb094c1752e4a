"""Exact rational arithmetic.

``Q`` is gmpy2's ``mpq``: exact like :class:`fractions.Fraction` (and
equal/hash-compatible with it) but roughly ten times faster, which the
per-message bookkeeping needs.
"""

from __future__ import annotations

import numbers
from fractions import Fraction
from typing import Union

from gmpy2 import mpq as Q

Rational = Union[int, Fraction, "Q"]


def is_exact(x: object) -> bool:
    return isinstance(x, numbers.Rational) and not isinstance(x, bool)


def as_fraction(value: Rational | str) -> Q:
    """Coerce ints, Fractions, mpqs and text ("3", "0.5", "7/4") to ``Q``.

    Floats are rejected: they would silently carry binary rounding
    error into an otherwise exact computation.
    """
    if type(value) is Q:
        return value
    if isinstance(value, float):
        raise TypeError(f"refusing float {value!r}; pass a str or Fraction")
    if isinstance(value, str):
        value = value.strip()
        if not value:
            raise ValueError("empty rational literal")
        # Fraction's parser accepts decimals and p/q with the strictness we want
        value = Fraction(value)
    if isinstance(value, numbers.Rational) and not isinstance(value, bool):
        return Q(int(value.numerator), int(value.denominator))
    raise TypeError(f"not a rational: {value!r}")


def fmt(q: Rational) -> str:
    """Render as "p" or "p/q"."""
    q = Q(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def nbits(k: int) -> int:
    """Bit length with a floor of one bit (zero still occupies a symbol)."""
    return max(1, int(abs(k).bit_length()))


def rational_bits(q: Rational) -> int:
    q = Q(q)
    return nbits(q.numerator) + nbits(q.denominator)


def weight_width(q: Rational) -> int:
    """Bit width of a weight: the wider of numerator and denominator."""
    q = Q(q)
    return max(nbits(q.numerator), nbits(q.denominator))
