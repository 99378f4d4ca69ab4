"""
Dual numeric backend: exact rationals (fractions.Fraction) and IEEE doubles.

A value is exact when it is an int or a Fraction. Arithmetic mixing an exact
value with a float silently degrades to float, which is the float mode.
"""
import logging
import math
import re
from fractions import Fraction
from typing import Optional, Union

from typing_extensions import TypeAlias

logger = logging.getLogger('numeric')

Number: TypeAlias = Union[Fraction, float, int]

REL_TOL = 1e-10
THRESHOLD_TOL = 1e-12

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)\s*(?:/\s*(\d+))?\s*$")


def is_exact(*values) -> bool:
    return all(isinstance(v, (int, Fraction)) and not isinstance(v, bool) for v in values)


def as_exact(value: Number) -> Number:
    """Normalize ints to Fraction; floats pass through."""
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    return value


def parse_number(text: str) -> Number:
    """
    Parse a CLI/number literal.

    Args:
        text: "p/q" or an integer gives an exact Fraction; anything else
            float() accepts (decimals, exponents) gives a float.

    Returns:
        The parsed number

    Raises:
        ValueError: when text is not a number
    """
    if isinstance(text, (int, float, Fraction)):
        return as_exact(text)
    match = _RATIONAL_RE.match(text)
    if match:
        num, den = match.groups()
        if den is not None and int(den) == 0:
            raise ValueError(f"zero denominator in {text!r}")
        return Fraction(int(num), int(den) if den else 1)
    return float(text)


def exact_sqrt(value: Fraction) -> Optional[Fraction]:
    """Square root of a nonnegative rational when both parts are perfect squares."""
    value = Fraction(value)
    if value < 0:
        return None
    num, den = math.isqrt(value.numerator), math.isqrt(value.denominator)
    if num * num == value.numerator and den * den == value.denominator:
        return Fraction(num, den)
    return None


def sqrt(value: Number) -> Number:
    if is_exact(value):
        root = exact_sqrt(value)
        if root is not None:
            return root
        logger.debug(f"sqrt({value}) is irrational, switching to float")
    return math.sqrt(float(value))


def is_zero(value: Number, scale: float = 1.0) -> bool:
    if is_exact(value):
        return value == 0
    return abs(value) <= THRESHOLD_TOL * max(1.0, abs(scale))


def close(a: Number, b: Number, rel: float = THRESHOLD_TOL) -> bool:
    """Equality test: exact when both sides are exact, relative tolerance otherwise."""
    if is_exact(a, b):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=rel, abs_tol=rel)


def compare(a: Number, b: Number, rel: float = THRESHOLD_TOL) -> int:
    """Three-way comparison that treats near-equal floats as equal."""
    if close(a, b, rel):
        return 0
    return -1 if a < b else 1


def binom2(n: int) -> int:
    return n * (n - 1) // 2


def to_json_value(value):
    """Exact values become ints or "p/q" strings; floats stay floats."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, Fraction):
        return value.numerator if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return "nan"
        return value
    if isinstance(value, dict):
        return {key: to_json_value(v) for key, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_json_value(v) for v in value]
    if hasattr(value, "item"):
        return to_json_value(value.item())
    return value
