"""
Formatting helpers shared by the schemas and the command-line front end.

Rationals travel as integers or ``"num/den"`` strings so they stay exact;
only bound values are printed as decimals, with 12 significant digits.
"""

import logging
import re
from decimal import Decimal, localcontext
from fractions import Fraction

logger = logging.getLogger(__name__)

BOUND_DIGITS = 12

_RATIONAL = re.compile(r"^\s*(?P<num>[+-]?\d+)\s*(?:/\s*(?P<den>\d+)\s*)?$")


def parse_rational(value: int | str | Fraction) -> Fraction:
    """
    Read an exact rational.

    Args:
        value: An integer, a ``Fraction`` or a string ``"n"`` / ``"n/d"``.

    Returns:
        Fraction: The value in lowest terms.

    Raises:
        ValueError: For floats, booleans, malformed strings or a zero
            denominator.

    Example:
        >>> parse_rational("-6/4")
        Fraction(-3, 2)
    """
    if isinstance(value, bool) or isinstance(value, float):
        raise ValueError(f"expected an integer or 'num/den' string, got {value!r}")
    if isinstance(value, int | Fraction):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"expected an integer or 'num/den' string, got {value!r}")
    match = _RATIONAL.match(value)
    if not match:
        raise ValueError(f"malformed rational {value!r}")
    denominator = int(match["den"] or 1)
    if denominator == 0:
        raise ValueError(f"zero denominator in {value!r}")
    return Fraction(int(match["num"]), denominator)


def format_rational(value: Fraction | int) -> int | str:
    """Integers stay integers; everything else becomes ``"num/den"``."""
    value = Fraction(value)
    if value.denominator == 1:
        return value.numerator
    return f"{value.numerator}/{value.denominator}"


def format_bound(value: Decimal | Fraction | int | None) -> str | None:
    """
    A bound value as a decimal string with 12 significant digits.

    ``None`` (no bound available) passes through unchanged.
    """
    if value is None:
        return None
    with localcontext() as ctx:
        ctx.prec = 40
        if isinstance(value, Fraction):
            value = Decimal(value.numerator) / Decimal(value.denominator)
        else:
            value = Decimal(value)
        text = format(value, f".{BOUND_DIGITS}g")
    return text
