"""Unit tests for money arithmetic and exact apportionment."""
from fractions import Fraction

import pytest
from pydantic import ValidationError

from agora.models.money import INT64_MAX, Money, apportion, round_preserving_sum


class TestMoney:
    """Tests for the Money value type."""

    @pytest.mark.parametrize(
        "text,micro",
        [("2.50", 2_500_000), ("$1", 1_000_000), ("0.000001", 1), ("-0.25", -250_000)],
    )
    def test_parse_decimal_amounts(self, text, micro):
        """Test parsing decimal currency amounts into micro-units."""
        assert Money.of(text).micro_units == micro

    def test_parse_rejects_sub_micro_precision(self):
        """Test that amounts finer than one micro-unit are refused."""
        with pytest.raises(ValueError, match="finer than one micro-unit"):
            Money.of("0.0000001")

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            Money.of("two dollars")

    def test_rendering(self):
        """Test the human-readable rendering keeps at least two decimals."""
        assert str(Money.of("1")) == "$1.00"
        assert str(Money.of("0.3125")) == "$0.3125"
        assert str(Money.micro(-1)) == "-$0.000001"

    def test_arithmetic_stays_integral(self):
        total = Money.of("0.10") + Money.of("0.20")
        assert total == Money.of("0.30")
        assert Money.of("0.05") * 3 == Money.of("0.15")
        assert sum([Money.of("1"), Money.of("2")]) == Money.of("3")

    def test_serializes_as_bare_integer(self):
        """Test that money round-trips through JSON as micro-units."""
        assert Money.of("2.5").model_dump() == 2_500_000
        assert Money.model_validate(42) == Money.micro(42)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValidationError):
            Money.micro(INT64_MAX + 1)

    def test_rejects_boolean(self):
        with pytest.raises(ValidationError):
            Money.model_validate(True)


class TestApportion:
    """Tests for largest-remainder rounding."""

    def test_round_preserving_sum_hands_out_shortfall(self):
        """Test that the shortfall goes to the largest fractional parts."""
        exact = [Fraction(10, 3), Fraction(10, 3), Fraction(10, 3)]
        assert round_preserving_sum(exact) == [4, 3, 3]

    def test_ties_go_to_earlier_position(self):
        assert round_preserving_sum([Fraction(1, 2), Fraction(1, 2)]) == [1, 0]

    @pytest.mark.parametrize("total", [0, 1, 7, 1_000_001, 2_500_000])
    def test_apportion_conserves_total(self, total):
        """Test that apportioned parts always sum to the total."""
        weights = [Fraction(1, 2), Fraction(1, 3), Fraction(1, 6)]
        parts = apportion(total, weights)
        assert sum(parts) == total
        assert all(p >= 0 for p in parts)
