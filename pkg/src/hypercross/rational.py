"""Exact rational helpers shared by every module.

Rationals cross every I/O boundary as ``"p/q"`` strings (``"3"`` for
integers); floats are rejected on input so that no rounding sneaks in.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable

Rational = Fraction

#: Sentinel for an infinite crossratio value (axiom (A3) limits).
INF = math.inf


def as_rational(value) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are refused: an exact pipeline must not start from a rounded value.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational string")
        return Fraction(text)
    raise TypeError(f"expected int, Fraction or 'p/q' string, got {type(value).__name__}")


def fmt(value) -> str:
    """Serialize a rational (or the infinity sentinel) as a string."""
    if value == INF:
        return "inf"
    q = as_rational(value)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


def parse(text: str):
    if text.strip().lower() in ("inf", "infinity"):
        return INF
    return as_rational(text)


def common_denominator(values: Iterable[Fraction]) -> int:
    den = 1
    for v in values:
        if v == INF:
            continue
        den = math.lcm(den, as_rational(v).denominator)
    return den
