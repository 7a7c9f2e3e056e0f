"""
Persona walkthroughs

Bob composes a price-forecasting pipeline from a listings dataset, crime
rates and elastic net. Alice improves it with feature engineering and linear
regression and earns revenue that is split back through the share tree.
Charlie matches a predictor under an error bound, runs it within budget and
receives the result through an escrowed transfer.
"""

import asyncio
import math
from typing import Dict, List, Optional, Sequence, Tuple

import structlog

from agora.assets import compose_pipeline
from agora.catalog import (
    Marketplace,
    QualityBound,
    Request,
    aggregate,
    equivalents,
    match_request,
    search,
)
from agora.catalog.matchmaking import rank_summary
from agora.escrow import SimNetConfig, run_session
from agora.execution import (
    AuthorityRegistry,
    ImplementationVariant,
    NodeExecutorInfo,
    builtin_variants,
    issue_certificate,
    select_variants,
    variant_classes,
)
from agora.errors import BudgetInfeasible
from agora.metering import (
    InMemoryPaymentBackend,
    Ledger,
    PaymentStatus,
    PaymentTxn,
    Settlement,
    UsageTracker,
    credits_by_beneficiary,
    make_invoice,
    split_payment,
)
from agora.metering.invoicing import Pricing
from agora.models import (
    AssetDescriptor,
    AssetKind,
    CertificateRequirement,
    LogicalSignature,
    PayPerUse,
    QualityMetric,
    Region,
    RevenueShareTree,
    UsageEvent,
    UsageMetric,
    UsageUnit,
)
from agora.models.assets import PipelineGraph, TypeRef
from agora.models.money import Money
from agora.models.pricing import PayOnce, describe_pricing
from agora.planner import OperatorSlot, relational_signature
from agora.query import OpKind

logger = structlog.get_logger(__name__)

LISTINGS = "real-estate-table"
CRIMES = "crime-table"
ESTIMATE = "price-estimate"

BOB_PIPELINE = "bob.price-forecast"
ALICE_PIPELINE = "alice.price-forecast-plus"
EU_AUTHORITY = "eu-authority"
EU_AUTHORITY_KEY = "eu-authority-demo-key"


def _asset(
    asset_id: str,
    kind: AssetKind,
    provider: str,
    goal: str,
    inputs: Sequence[TypeRef],
    output: TypeRef,
    pricing: Pricing,
    mae: Optional[float] = None,
    region: Optional[Region] = None,
    graph: Optional[PipelineGraph] = None,
    share: Optional[RevenueShareTree] = None,
) -> AssetDescriptor:
    return AssetDescriptor(
        id=asset_id,
        kind=kind,
        name=asset_id.replace(".", " ").replace("-", " "),
        provider=provider,
        signature=LogicalSignature(goal=goal, input_types=tuple(inputs), output_type=output),
        quality=() if mae is None else (QualityMetric(name="mae", value=mae, unit="EUR"),),
        pricing=pricing,
        region=region,
        graph=graph,
        revenue_share=share,
    )


def _per_thousand(amount: str) -> PayPerUse:
    return PayPerUse(rate=Money.of(amount), metric=UsageUnit.PER_THOUSAND_CALLS)


def _per_call(amount: str) -> PayPerUse:
    return PayPerUse(rate=Money.of(amount), metric=UsageUnit.PER_CALL)


def persona_markets() -> Dict[str, Marketplace]:
    """The Berlin open-data market and an ML hub, before any persona acts."""
    open_data = Marketplace("berlin-open-data")
    for descriptor in (
        _asset(
            "real-estate-pricing",
            AssetKind.DATA_SOURCE,
            "berlin-open-data",
            "data-source",
            (),
            LISTINGS,
            PayOnce(price=Money.of("5")),
            region=Region.EU,
        ),
        _asset(
            "crime-rates-berlin",
            AssetKind.DATA_SOURCE,
            "berlin-open-data",
            "data-source",
            (),
            CRIMES,
            PayOnce(price=Money.of("2")),
            region=Region.EU,
        ),
    ):
        open_data.publish(descriptor)

    hub = Marketplace("ml-hub")
    for descriptor in (
        _asset("crime-join", AssetKind.ALGORITHM, "ml-hub", "feature-engineering",
               (LISTINGS, CRIMES), LISTINGS, _per_call("0.01")),
        _asset("polynomial-features", AssetKind.ALGORITHM, "ml-hub", "feature-engineering",
               (LISTINGS,), LISTINGS, _per_call("0.01")),
        _asset("elastic-net", AssetKind.ALGORITHM, "ml-hub", "regression",
               (LISTINGS,), ESTIMATE, _per_call("0.05"), mae=5400),
        _asset("linear-regression", AssetKind.ALGORITHM, "ml-hub", "regression",
               (LISTINGS,), ESTIMATE, _per_call("0.05"), mae=4800),
        _asset("neural-network", AssetKind.ALGORITHM, "ml-hub", "regression",
               (LISTINGS,), ESTIMATE, _per_call("0.50"), mae=4100),
    ):
        hub.publish(descriptor)
    return {open_data.name: open_data, hub.name: hub}


def _components(markets: Dict[str, Marketplace], ids: Sequence[str]) -> List[AssetDescriptor]:
    index = aggregate(markets.values())
    return [index.descriptors[i] for i in ids]


def bob_pipeline(markets: Dict[str, Marketplace]) -> AssetDescriptor:
    parts = _components(
        markets, ("real-estate-pricing", "crime-rates-berlin", "crime-join", "elastic-net")
    )
    graph = compose_pipeline(parts, [(0, 0, 2, 0), (1, 0, 2, 1), (2, 0, 3, 0)])
    share = RevenueShareTree(
        beneficiary=BOB_PIPELINE,
        children=(
            RevenueShareTree(beneficiary="bob", share="1/2"),
            RevenueShareTree(beneficiary="berlin-open-data", share="1/4"),
            RevenueShareTree(beneficiary="ml-hub", share="1/4"),
        ),
    )
    return _asset(BOB_PIPELINE, AssetKind.PIPELINE, "bob", "regression", (), ESTIMATE,
                  _per_thousand("0.50"), mae=5400, graph=graph, share=share)


def alice_pipeline(markets: Dict[str, Marketplace]) -> AssetDescriptor:
    parts = _components(
        markets,
        (
            "real-estate-pricing",
            "crime-rates-berlin",
            "crime-join",
            "polynomial-features",
            "linear-regression",
        ),
    )
    graph = compose_pipeline(
        parts, [(0, 0, 2, 0), (1, 0, 2, 1), (2, 0, 3, 0), (3, 0, 4, 0)]
    )
    share = RevenueShareTree(
        beneficiary=ALICE_PIPELINE,
        children=(
            RevenueShareTree(beneficiary="alice", share="1/2"),
            RevenueShareTree(
                beneficiary=BOB_PIPELINE,
                share="1/4",
                children=(
                    RevenueShareTree(beneficiary="bob", share="1/2"),
                    RevenueShareTree(beneficiary="berlin-open-data", share="1/2"),
                ),
            ),
            RevenueShareTree(beneficiary="ml-hub", share="1/4"),
        ),
    )
    return _asset(ALICE_PIPELINE, AssetKind.PIPELINE, "alice", "regression", (), ESTIMATE,
                  _per_thousand("1"), mae=4600, graph=graph, share=share)


def _publish(markets: Dict[str, Marketplace], market: str, descriptor: AssetDescriptor) -> str:
    target = markets.setdefault(market, Marketplace(market))
    return target.publish(descriptor)


def demo_bob(seed: int = 0) -> List[str]:
    markets = persona_markets()
    out = ["# bob: augment listings with crime rates and publish a forecaster"]
    index = aggregate(markets.values())
    found = search(index, ["crime", "berlin"])
    out.append(f"[1] search crime berlin -> {', '.join(found)}")

    pipeline = bob_pipeline(markets)
    nodes = " -> ".join(n.asset_ref for n in pipeline.graph.nodes)  # type: ignore[union-attr]
    out.append(f"[2] augment listings with crime rates: {nodes}")
    out.append(f"[3] forecaster mae={pipeline.metric('mae').value:g}")  # type: ignore[union-attr]
    asset_id = _publish(markets, "bob-market", pipeline)
    price = describe_pricing(pipeline.pricing)
    out.append(f"[4] published {asset_id} market=bob-market price={price}")

    index = aggregate(markets.values())
    out.append(f"    equivalents: {', '.join(sorted(equivalents(index, asset_id)))}")
    out.append(f"    discoverable by 'forecast': {asset_id in search(index, ['forecast'])}")
    return out


def demo_alice(seed: int = 0) -> List[str]:
    markets = persona_markets()
    _publish(markets, "bob-market", bob_pipeline(markets))
    out = ["# alice: improve bob's forecaster and earn from it"]

    index = aggregate(markets.values())
    found = search(index, ["bob", "forecast"])
    out.append(f"[1] search bob forecast -> {', '.join(found)}")

    pipeline = alice_pipeline(markets)
    out.append(
        "[2] replace elastic-net with polynomial-features + linear-regression: "
        f"mae {index.descriptors[BOB_PIPELINE].metric('mae').value:g} -> "  # type: ignore
        f"{pipeline.metric('mae').value:g}"  # type: ignore[union-attr]
    )
    asset_id = _publish(markets, "alice-market", pipeline)
    price = describe_pricing(pipeline.pricing)
    out.append(f"[3] published {asset_id} market=alice-market price={price}")

    tracker = UsageTracker(window_s=60)
    calls = [
        UsageEvent(asset=asset_id, metric=UsageMetric.CALLS, amount=1, at=i % 3600,
                   node="node-eu", event_id=f"call-{i}")
        for i in range(2500)
    ]
    tracker.track_all(calls)
    counters = tracker.flush_window(3600)
    invoice = make_invoice(counters, {asset_id: pipeline.pricing}, (0, 3600))
    out.append(f"[4] {len(calls)} calls in {len(counters)} windows, invoiced:")
    out.extend("    " + line for line in invoice.render().splitlines())

    splits = split_payment(invoice.total, pipeline.revenue_share)  # type: ignore[arg-type]
    out.append("[5] revenue split through the share tree:")
    for beneficiary, amount in sorted(credits_by_beneficiary(splits).items()):
        out.append(f"    {beneficiary} {amount}")

    ledger = Ledger()
    try:
        txns = [
            PaymentTxn(txn_id=f"split-{i}", payer=asset_id, payee=b, amount=a)
            for i, (b, a) in enumerate(splits)
            if a.micro_units > 0
        ]
        receipts = asyncio.run(Settlement(InMemoryPaymentBackend(), ledger).settle(txns))
        confirmed = sum(1 for r in receipts if r.status == PaymentStatus.CONFIRMED)
        out.append(f"[6] settled {confirmed}/{len(receipts)} payouts; ledger balances:")
        for party, amount in sorted(ledger.balances().items()):
            out.append(f"    {party} {amount}")
    finally:
        ledger.close()
    return out


def charlie_environment() -> Tuple[List[ImplementationVariant], List[NodeExecutorInfo],
                                   AuthorityRegistry]:
    """Regression variants and two certified EU nodes.

    enclave-regression also demands a "tee" attestation, which neither node
    holds, so it stays out of every plan until an enclave node joins.
    """
    registry = AuthorityRegistry({EU_AUTHORITY: EU_AUTHORITY_KEY})
    trained = LogicalSignature(goal="regression", input_types=(LISTINGS,), output_type=ESTIMATE)
    in_eu = CertificateRequirement(property="region=EU", trusted_authorities=(EU_AUTHORITY,))
    in_tee = CertificateRequirement(property="tee", trusted_authorities=(EU_AUTHORITY,))
    variants = builtin_variants() + [
        ImplementationVariant(asset="linear-regression", implements=trained, runtime_factor=2.0,
                              price=_per_call("0.05"), required_certificates=(in_eu,),
                              required_capability="ml"),
        ImplementationVariant(asset="neural-network", implements=trained, runtime_factor=1.0,
                              price=_per_call("0.50"), required_certificates=(in_eu,),
                              required_capability="ml"),
        ImplementationVariant(asset="enclave-regression", implements=trained, runtime_factor=0.5,
                              price=_per_call("0.20"), required_certificates=(in_eu, in_tee),
                              required_capability="ml"),
    ]

    def node(node_id: str, speed: float, hourly: str) -> NodeExecutorInfo:
        return NodeExecutorInfo(
            node_id=node_id,
            region=Region.EU,
            capabilities=("ml", "relational"),
            certificates=(
                issue_certificate(EU_AUTHORITY, EU_AUTHORITY_KEY, node_id, "region=EU", 10**9),
            ),
            price=PayPerUse(rate=Money.of(hourly), metric=UsageUnit.PER_HOUR),
            speed_factor=speed,
        )

    nodes = [node("berlin-cpu", 1.0, "0.36"), node("berlin-gpu", 4.0, "3.60")]
    return variants, nodes, registry


def charlie_slots(rows: int = 1000) -> List[OperatorSlot]:
    trained = LogicalSignature(goal="regression", input_types=(LISTINGS,), output_type=ESTIMATE)
    return [
        OperatorSlot(op_id="op1", signature=relational_signature(OpKind.SCAN), rows=rows,
                     region=Region.EU, label="SCAN real-estate-pricing"),
        OperatorSlot(op_id="op2", signature=trained, rows=rows, region=Region.EU,
                     label="TRAIN regression"),
    ]


def demo_charlie(seed: int = 0) -> List[str]:
    markets = persona_markets()
    _publish(markets, "bob-market", bob_pipeline(markets))
    _publish(markets, "alice-market", alice_pipeline(markets))
    out = ["# charlie: find a predictor with mae <= 5000, run it within budget"]

    request = Request(goal="regression", quality_bounds=(QualityBound.parse("mae<=5000"),))
    result = match_request(aggregate(markets.values()), request)
    out.append(f"[1] match regression mae<=5000 -> {len(result)} candidates")
    out.extend("    " + line for line in rank_summary(result))

    variants, nodes, registry = charlie_environment()
    classes = variant_classes(variants)
    slots = charlie_slots()
    out.append("[2] execute real-estate-pricing+linear-regression on certified EU nodes")
    chosen = None
    for budget in (Money.of("0.30"), Money.of("0.60"), Money.of("1.00")):
        try:
            plan = select_variants(slots, classes, nodes, budget, registry=registry)
        except BudgetInfeasible as exc:
            out.append(f"    budget {budget}: infeasible, cheapest {exc.min_price}")
            continue
        out.append(
            f"    budget {budget}: runtime={plan.estimated_runtime:.1f}s "
            f"price={plan.estimated_price}"
        )
        out.extend("      " + line for line in plan.describe())
        chosen = plan
    assert chosen is not None
    trainer = chosen.binding_for("op2").variant.asset
    if trainer != "linear-regression":
        out.append(f"    linear-regression replaced by equivalent {trainer}")

    pricing: Dict[str, Pricing] = {}
    events: List[UsageEvent] = []
    for binding in chosen.bindings:
        pricing[binding.variant.asset] = binding.variant.price  # type: ignore[assignment]
        pricing[binding.node.node_id] = binding.node.price
        events.append(UsageEvent(asset=binding.variant.asset, metric=UsageMetric.CALLS,
                                 amount=1, at=0, node=binding.node.node_id,
                                 event_id=f"{binding.slot.op_id}:call"))
        events.append(UsageEvent(asset=binding.node.node_id, metric=UsageMetric.SECONDS,
                                 amount=math.ceil(binding.runtime), at=0,
                                 node=binding.node.node_id,
                                 event_id=f"{binding.slot.op_id}:seconds"))
    tracker = UsageTracker(window_s=3600)
    tracker.track_all(events)
    invoice = make_invoice(tracker.flush_window(3600), pricing, (0, 3600))
    out.append("[3] metered run invoiced:")
    out.extend("    " + line for line in invoice.render().splitlines())

    model = bytes(range(256)) * 40
    transcript = asyncio.run(
        run_session(model, SimNetConfig(seed=seed, drop_rate=0.1), InMemoryPaymentBackend(),
                    chunk_bytes=2048, price_per_chunk=Money.of("0.01"), session_id="charlie",
                    payer="charlie", payee=trainer)
    )
    out.append(
        f"[4] trained model delivered by escrow: outcome={transcript.outcome} "
        f"chunks={len(transcript.payments)} intact={transcript.plaintext == model}"
    )
    logger.info("demo_finished", persona="charlie", trainer=trainer)
    return out


DEMOS = {"bob": demo_bob, "alice": demo_alice, "charlie": demo_charlie}


def run_demo(persona: str, seed: int = 0) -> List[str]:
    return DEMOS[persona](seed)
