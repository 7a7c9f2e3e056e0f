"""Unit tests for pricing models."""
from fractions import Fraction

import pytest
from pydantic import TypeAdapter

from agora.models import PayOnce, PayPerUse, PricingModel, Subscription, UsageUnit
from agora.models.money import Money
from agora.models.pricing import describe_pricing, estimate_charge, license_active
from agora.models.usage import UsageMetric


class TestPricingModels:
    """Tests for pay-once, subscription and pay-per-use pricing."""

    def test_discriminated_by_model_field(self):
        """Test that documents select the pricing variant by their tag."""
        adapter = TypeAdapter(PricingModel)
        parsed = adapter.validate_python(
            {"model": "pay_per_use", "rate": 1_000_000, "metric": "per_thousand_calls"}
        )
        assert isinstance(parsed, PayPerUse)
        assert parsed.billed_metric == UsageMetric.CALLS

    def test_exact_charge_per_thousand_calls(self):
        """Test that 2500 calls at $1 per thousand owe exactly $2.50."""
        pricing = PayPerUse(rate=Money.of("1"), metric=UsageUnit.PER_THOUSAND_CALLS)
        assert pricing.exact_charge(2500) == 2_500_000
        assert pricing.billed_quantity(2500) == Fraction(5, 2)

    def test_estimate_charge_per_hour_rounds_half_up(self):
        pricing = PayPerUse(rate=Money.of("0.36"), metric=UsageUnit.PER_HOUR)
        assert estimate_charge(pricing, seconds=Fraction(1000)) == Money.of("0.10")
        assert estimate_charge(pricing, seconds=Fraction(1, 100)) == Money.micro(1)

    def test_flat_models_charge_their_price(self):
        assert estimate_charge(PayOnce(price=Money.of("5")), calls=100) == Money.of("5")

    def test_subscription_license_window(self):
        """Test that a subscription covers exactly one period after purchase."""
        pricing = Subscription(price=Money.of("10"), period_s=3600)
        assert license_active(pricing, 100, 100)
        assert license_active(pricing, 100, 3699)
        assert not license_active(pricing, 100, 3700)
        assert not license_active(pricing, 100, 99)

    def test_pay_once_never_expires(self):
        assert license_active(PayOnce(price=Money.of("1")), 0, 10**9)

    @pytest.mark.parametrize(
        "pricing,text",
        [
            (PayOnce(price=Money.of("5")), "$5.00 once"),
            (Subscription(price=Money.of("3"), period_s=60), "$3.00 per 60 s"),
            (PayPerUse(rate=Money.of("0.5"), metric=UsageUnit.PER_MEGABYTE), "$0.50 per MB"),
        ],
    )
    def test_describe(self, pricing, text):
        assert describe_pricing(pricing) == text
