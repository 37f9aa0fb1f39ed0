from decimal import Decimal
from fractions import Fraction

import pytest
from common.utils import format_bound, format_rational, parse_rational


class TestParseRational:
    """Test reading exact rationals."""

    @pytest.mark.parametrize(
        "text, expected",
        [
            (3, Fraction(3)),
            ("-6/4", Fraction(-3, 2)),
            ("0", Fraction(0)),
            (" 5 / 7 ", Fraction(5, 7)),
            ("+2", Fraction(2)),
            (Fraction(1, 3), Fraction(1, 3)),
        ],
    )
    def test_accepted(self, text, expected):
        assert parse_rational(text) == expected

    @pytest.mark.parametrize("value", [0.5, True, "1/0", "1.5", "a/b", "", None])
    def test_rejected(self, value):
        with pytest.raises(ValueError):
            parse_rational(value)


class TestFormatting:
    """Test rational and bound output."""

    def test_format_rational(self):
        assert format_rational(Fraction(4, 2)) == 2
        assert format_rational(Fraction(-1, 3)) == "-1/3"
        assert format_rational(7) == 7

    def test_format_bound_digits(self):
        assert format_bound(Decimal("1.921812055672805698668")) == "1.92181205567"
        assert format_bound(Fraction(2, 3)) == "0.666666666667"

    def test_format_bound_integers(self):
        assert format_bound(Fraction(9)) == "9"
        assert format_bound(Decimal(0)) == "0"

    def test_format_bound_none(self):
        assert format_bound(None) is None
