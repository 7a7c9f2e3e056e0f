"""Integration tests for the persona walkthroughs and a full query-to-payout flow."""
import pytest

from agora.demo import run_demo
from agora.escrow import SimNetConfig, run_session
from agora.execution import (
    builtin_variants,
    default_nodes,
    execute_plan,
    generate_database,
    select_variants,
    variant_classes,
)
from agora.metering import (
    InMemoryPaymentBackend,
    Ledger,
    PaymentTxn,
    UsageTracker,
    credits_by_beneficiary,
    make_invoice,
    settle,
    split_payment,
)
from agora.models import PayPerUse, Region, RevenueShareTree, UsageMetric, UsageUnit
from agora.models.money import Money
from agora.planner import plan_query
from tests.oracles import metered_total

pytestmark = pytest.mark.integration


class TestPersonaDemos:
    """Tests for the scripted walkthroughs."""

    def test_bob(self):
        lines = run_demo("bob")
        assert lines[1] == "[1] search crime berlin -> crime-rates-berlin"
        assert lines[2] == (
            "[2] augment listings with crime rates: "
            "real-estate-pricing -> crime-rates-berlin -> crime-join -> elastic-net"
        )
        assert lines[3] == "[3] forecaster mae=5400"
        assert lines[4].startswith("[4] published bob.price-forecast market=bob-market")
        assert lines[-1] == "    discoverable by 'forecast': True"

    def test_alice(self):
        """Test that alice's invoice flows through the nested share tree."""
        lines = run_demo("alice")
        assert "    total $2.50" in lines
        start = lines.index("[5] revenue split through the share tree:")
        assert lines[start + 1 : start + 5] == [
            "    alice $1.25",
            "    berlin-open-data $0.3125",
            "    bob $0.3125",
            "    ml-hub $0.625",
        ]
        assert "[6] settled 4/4 payouts; ledger balances:" in lines
        assert "    alice.price-forecast-plus -$2.50" in lines

    def test_charlie(self):
        lines = run_demo("charlie")
        assert "    budget $0.30: infeasible, cheapest $0.35" in lines
        assert "    budget $0.60: runtime=2250.0s price=$0.50" in lines
        assert "    budget $1.00: runtime=500.0s price=$1.00" in lines
        assert "    linear-regression replaced by equivalent neural-network" in lines
        assert "    total $1.00" in lines
        assert lines[-1] == (
            "[4] trained model delivered by escrow: outcome=Completed chunks=5 intact=True"
        )

    @pytest.mark.parametrize("persona", ["bob", "alice", "charlie"])
    def test_repeatable(self, persona):
        assert run_demo(persona) == run_demo(persona)


async def test_query_to_payout(tpch_program):
    """Test one query from planning through metering, billing, payout and delivery."""
    spec = tpch_program.queries[0]
    optimized = plan_query(spec, tpch_program.registry, tpch_program.policies)
    bound = select_variants(
        optimized.plan, variant_classes(builtin_variants()), default_nodes(Region)
    )
    db = generate_database(tpch_program.registry, seed=5)
    result = execute_plan(bound, db, tpch_program.registry, run_id="q1", at=10)

    tracker = UsageTracker(window_s=60)
    tracker.track_all(result.events + result.events)
    shipped = [c for c in tracker.flush_window(3600) if c.metric == UsageMetric.BYTES]
    pricing = {
        c.asset: PayPerUse(rate=Money.of("0.25"), metric=UsageUnit.PER_MEGABYTE) for c in shipped
    }
    invoice = make_invoice(shipped, pricing, (0, 3600))
    assert invoice.total.micro_units == metered_total(result.events, pricing)

    tree = RevenueShareTree(
        beneficiary="carrier",
        children=(
            RevenueShareTree(beneficiary="eu-link", share="2/3"),
            RevenueShareTree(beneficiary="me-link", share="1/3"),
        ),
    )
    splits = split_payment(invoice.total, tree)
    txns = [
        PaymentTxn(txn_id=f"payout-{b}", payer="analyst", payee=b, amount=a)
        for b, a in splits
        if a.micro_units > 0
    ]
    ledger = Ledger()
    receipts = await settle(txns, InMemoryPaymentBackend(), ledger)
    assert all(r.status.value == "confirmed" for r in receipts)
    balances = ledger.balances()
    assert sum((m for m in balances.values()), Money.zero()) == Money.zero()
    assert balances.get("analyst", Money.zero()) == -invoice.total
    for beneficiary, amount in credits_by_beneficiary(splits).items():
        if amount.micro_units:
            assert balances[beneficiary] == amount
    ledger.close()

    payload = " | ".join(result.labels).encode() * 64
    transcript = await run_session(payload, SimNetConfig(seed=5, drop_rate=0.2), chunk_bytes=1024)
    assert transcript.completed
    assert transcript.plaintext == payload
