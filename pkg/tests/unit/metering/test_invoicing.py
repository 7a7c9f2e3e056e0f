"""Unit tests for invoices."""
import random

import pytest

from agora.errors import DocumentSyntaxError, MissingPricing, SchemaError
from agora.metering import UsageTracker, load_pricing, make_invoice, parse_period
from agora.models import AggregatedCounter, PayOnce, PayPerUse, UsageMetric, UsageUnit
from agora.models.money import Money
from agora.models.pricing import Subscription
from tests.factories import UsageEventFactory
from tests.oracles import metered_total

PER_THOUSAND = PayPerUse(rate=Money.of("1"), metric=UsageUnit.PER_THOUSAND_CALLS)


def rate(rng, ceiling, unit):
    return PayPerUse(rate=Money.micro(rng.randint(1, ceiling)), metric=unit)


def counter(total, asset="forecaster", start=0, metric=UsageMetric.CALLS):
    return AggregatedCounter(
        window_start=start, window_end=start + 60, asset=asset, metric=metric, total=total
    )


class TestMakeInvoice:
    """Tests for billing counters against pricing models."""

    def test_per_thousand_calls(self):
        """Test that 2500 calls at $1 per thousand bill $2.50."""
        counters = [counter(1200), counter(1300, start=60)]
        invoice = make_invoice(counters, {"forecaster": PER_THOUSAND}, (0, 3600))
        (line,) = invoice.lines
        assert line.quantity == 2.5
        assert invoice.total.micro_units == 2_500_000

    def test_window_start_decides_the_period(self):
        counters = [counter(1000, start=0), counter(1000, start=3600)]
        invoice = make_invoice(counters, {"forecaster": PER_THOUSAND}, (0, 3600))
        assert invoice.total == Money.of("1")

    def test_flat_models(self):
        """Test that subscriptions bill whole periods and one-off prices bill once."""
        pricing = {
            "dataset": PayOnce(price=Money.of("5")),
            "feed": Subscription(price=Money.of("2"), period_s=1000),
        }
        invoice = make_invoice([], pricing, (0, 2500))
        assert [(line.asset, line.amount) for line in invoice.lines] == [
            ("dataset", Money.of("5")),
            ("feed", Money.of("6")),
        ]
        assert invoice.total == Money.of("11")

    def test_other_metrics_are_ignored(self):
        pricing = {"forecaster": PER_THOUSAND}
        invoice = make_invoice([counter(10**6, metric=UsageMetric.BYTES)], pricing, (0, 60))
        assert invoice.lines == ()

    def test_missing_pricing(self):
        with pytest.raises(MissingPricing):
            make_invoice([counter(1, asset="mystery")], {}, (0, 60))

    def test_sub_micro_amounts_conserve_the_total(self):
        """Test that line rounding never drifts from the floored exact total."""
        third = PayPerUse(rate=Money.micro(1), metric=UsageUnit.PER_THOUSAND_CALLS)
        pricing = {name: third for name in "abc"}
        counters = [counter(333_333, asset=name) for name in "abc"]
        invoice = make_invoice(counters, pricing, (0, 60))
        assert invoice.total.micro_units == 999
        assert sorted(line.amount.micro_units for line in invoice.lines) == [333, 333, 333]

    def test_no_line_exceeds_its_exact_charge(self):
        """Test that two 0.6 micro-unit lines both bill zero."""
        tiny = PayPerUse(rate=Money.micro(1), metric=UsageUnit.PER_THOUSAND_CALLS)
        pricing = {"a": tiny, "b": tiny}
        invoice = make_invoice([counter(600, asset="a"), counter(600, asset="b")], pricing, (0, 60))
        assert [line.amount.micro_units for line in invoice.lines] == [0, 0]
        assert invoice.total == Money.zero()

    def test_render(self):
        invoice = make_invoice([counter(2500)], {"forecaster": PER_THOUSAND}, (0, 3600))
        lines = invoice.render().splitlines()
        assert lines[0] == "invoice period 0..3600"
        assert lines[2].split() == [
            "forecaster", "calls", "2.5", "$1.00", "per", "thousand", "calls", "$2.50"
        ]
        assert lines[-1] == "total $2.50"

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_exact_metering(self, seed):
        """Test invoices against summing every event's exact charge."""
        rng = random.Random(seed)
        pricing = {
            "calls": rate(rng, 99_999, UsageUnit.PER_CALL),
            "batch": rate(rng, 999_999, UsageUnit.PER_THOUSAND_CALLS),
            "disk": rate(rng, 999_999, UsageUnit.PER_MEGABYTE),
            "cpu": rate(rng, 9_999_999, UsageUnit.PER_HOUR),
        }
        metrics = {
            "calls": UsageMetric.CALLS,
            "batch": UsageMetric.CALLS,
            "disk": UsageMetric.BYTES,
            "cpu": UsageMetric.SECONDS,
        }
        events = []
        for _ in range(250):
            asset = rng.choice(sorted(pricing))
            events.append(
                UsageEventFactory(
                    asset=asset,
                    metric=metrics[asset],
                    amount=rng.randint(0, 5000),
                    at=rng.randint(0, 3599),
                )
            )
        events += rng.choices(events, k=50)
        rng.shuffle(events)
        tracker = UsageTracker(window_s=60)
        tracker.track_all(events)
        invoice = make_invoice(tracker.flush_window(3600), pricing, (0, 3600))
        assert invoice.total.micro_units == metered_total(events, pricing)


class TestPricingFiles:
    """Tests for period strings and pricing documents."""

    def test_parse_period(self):
        assert parse_period("0..3600") == (0, 3600)

    @pytest.mark.parametrize("text", ["3600", "10..10", "a..b"])
    def test_parse_period_rejects(self, text):
        with pytest.raises(ValueError):
            parse_period(text)

    def test_load_pricing(self, write_json):
        path = write_json(
            "pricing.json",
            {"forecaster": {"model": "pay_per_use", "rate": 50_000, "metric": "per_call"}},
        )
        assert load_pricing(path) == {
            "forecaster": PayPerUse(rate=Money.of("0.05"), metric=UsageUnit.PER_CALL)
        }

    def test_load_pricing_not_json(self, write_lines):
        with pytest.raises(DocumentSyntaxError):
            load_pricing(write_lines("pricing.json", ["{nope"]))

    def test_load_pricing_bad_model(self, write_json):
        with pytest.raises(SchemaError):
            load_pricing(write_json("pricing.json", {"x": {"model": "barter"}}))
