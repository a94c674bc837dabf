"""Exact rational scalars.

``Rational`` is :class:`fractions.Fraction`: immutable, always reduced, with a
strictly positive denominator and zero stored as ``0/1``.  The helpers below
add the error types and the JSON encoding used by every file output.
"""
from __future__ import annotations

import operator
import random
from fractions import Fraction
from typing import Callable, Mapping

from .errors import DivisionByZero, ZeroDenominator

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)

_OPS: dict[str, Callable[[Fraction, Fraction], Fraction]] = {
    "add": operator.add,
    "sub": operator.sub,
    "mul": operator.mul,
    "div": operator.truediv,
}


def normalize(num: int, den: int) -> Fraction:
    """Return ``num/den`` in lowest terms with the sign on the numerator."""
    if den == 0:
        raise ZeroDenominator(f"denominator is zero (numerator {num})")
    return Fraction(int(num), int(den))


def arith(op: str, a: Fraction, b: Fraction) -> Fraction:
    try:
        fn = _OPS[op]
    except KeyError:
        raise ValueError(f"unknown operation {op!r}; expected one of {sorted(_OPS)}") from None
    if op == "div" and b == 0:
        raise DivisionByZero(f"{a} / 0")
    return fn(Fraction(a), Fraction(b))


def sample_positive(rng: random.Random, bound: int = 10) -> Fraction:
    """Draw ``p/q`` with ``p`` and ``q`` independently uniform on ``[1, bound]``."""
    if bound < 1:
        raise ValueError(f"bound must be >= 1, got {bound}")
    p = rng.randint(1, bound)
    q = rng.randint(1, bound)
    return Fraction(p, q)


def to_json(value: Fraction) -> dict[str, str]:
    value = Fraction(value)
    return {"num": str(value.numerator), "den": str(value.denominator)}


def from_json(obj: Mapping[str, str | int]) -> Fraction:
    return normalize(int(obj["num"]), int(obj["den"]))


def is_canonical(value: Fraction) -> bool:
    from math import gcd

    return value.denominator > 0 and gcd(abs(value.numerator), value.denominator) == 1
