"""Carrier values and the undefined marker.

A carrier value is an enumerated-value name (str), an int, a Decimal on a
stepped decimal grid, or a reified symbol reference. Arithmetic inside
formulas works on exact rationals so grid membership checks never suffer
float drift.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from typing import Union


@dataclass(frozen=True)
class SymRef:
    """A layer-(i) symbol reified as a carrier element."""

    name: str

    def __str__(self) -> str:
        return self.name


class _Undefined:
    """Singleton result of applying a partial mapping outside its table."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "UNDEF"


UNDEF = _Undefined()

Value = Union[int, Decimal, str, SymRef]


def is_numeric_value(v: object) -> bool:
    return isinstance(v, (int, Decimal, Fraction)) and not isinstance(v, bool)


def as_fraction(v: object) -> Fraction:
    if isinstance(v, Fraction):
        return v
    if isinstance(v, Decimal):
        return Fraction(v)
    if isinstance(v, int):
        return Fraction(v)
    raise TypeError(f"not numeric: {v!r}")


def values_equal(a: object, b: object) -> bool:
    """Equality across the value kinds; numerics compare exactly."""
    if is_numeric_value(a) and is_numeric_value(b):
        return as_fraction(a) == as_fraction(b)
    if isinstance(a, SymRef) and isinstance(b, SymRef):
        return a.name == b.name
    if isinstance(a, str) and isinstance(b, str):
        return a == b
    return False


def render_value(v: object) -> str:
    """Canonical text for a value, used by serializers and explanations."""
    if v is UNDEF:
        return "<undefined>"
    if isinstance(v, SymRef):
        return v.name
    if isinstance(v, Decimal):
        return format(v.normalize(), "f")
    if isinstance(v, Fraction):
        if v.denominator == 1:
            return str(v.numerator)
        return f"{v.numerator}/{v.denominator}"
    return str(v)
