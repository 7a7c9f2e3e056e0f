"""factory-boy factories for domain records used across the test suite."""
import factory

from agora.metering.settlement import PaymentTxn
from agora.models import (
    AssetDescriptor,
    AssetKind,
    LogicalSignature,
    PayOnce,
    PayPerUse,
    QualityMetric,
    Region,
    UsageEvent,
    UsageMetric,
    UsageUnit,
)
from agora.models.money import Money


class DescriptorFactory(factory.Factory):
    """A regression algorithm taking listings to a price estimate."""

    class Meta:
        model = AssetDescriptor

    id = factory.Sequence(lambda n: f"asset-{n}")
    kind = AssetKind.ALGORITHM
    name = factory.Faker("bs")
    provider = factory.Faker("company")
    signature = factory.LazyFunction(
        lambda: LogicalSignature(
            goal="regression", input_types=("listings",), output_type="price-estimate"
        )
    )
    quality = factory.LazyFunction(lambda: (QualityMetric(name="mae", value=5000.0),))
    pricing = factory.LazyFunction(
        lambda: PayPerUse(rate=Money.of("0.05"), metric=UsageUnit.PER_CALL)
    )


class DataSourceFactory(DescriptorFactory):
    kind = AssetKind.DATA_SOURCE
    region = Region.EU
    signature = factory.LazyFunction(
        lambda: LogicalSignature(goal="data-source", input_types=(), output_type="listings")
    )
    quality = ()
    pricing = factory.LazyFunction(lambda: PayOnce(price=Money.of("5")))


class UsageEventFactory(factory.Factory):
    class Meta:
        model = UsageEvent

    asset = "forecaster"
    metric = UsageMetric.CALLS
    amount = 1
    at = 0
    node = "node-eu"
    event_id = factory.Sequence(lambda n: f"event-{n}")


class PaymentTxnFactory(factory.Factory):
    class Meta:
        model = PaymentTxn

    txn_id = factory.Sequence(lambda n: f"txn-{n}")
    payer = factory.Faker("user_name")
    payee = factory.Faker("user_name")
    amount = factory.LazyFunction(lambda: Money.of("0.01"))
