"""
Pricing models
Pay-once, subscription and pay-per-use, tagged by the "model" field.
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Annotated, Literal, Union

from pydantic import BaseModel, ConfigDict, Field

from .money import Money, MICRO
from .usage import UsageMetric


class UsageUnit(str, Enum):
    PER_CALL = "per_call"
    PER_THOUSAND_CALLS = "per_thousand_calls"
    PER_MEGABYTE = "per_megabyte"
    PER_HOUR = "per_hour"


# unit -> (metered quantity, metered amount per billed unit, label)
UNIT_BASIS = {
    UsageUnit.PER_CALL: (UsageMetric.CALLS, 1, "call"),
    UsageUnit.PER_THOUSAND_CALLS: (UsageMetric.CALLS, 1000, "thousand calls"),
    UsageUnit.PER_MEGABYTE: (UsageMetric.BYTES, 1_000_000, "MB"),
    UsageUnit.PER_HOUR: (UsageMetric.SECONDS, 3600, "hour"),
}


class PayOnce(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: Literal["pay_once"] = "pay_once"
    price: Money


class Subscription(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: Literal["subscription"] = "subscription"
    price: Money
    period_s: int


class PayPerUse(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    model: Literal["pay_per_use"] = "pay_per_use"
    rate: Money
    metric: UsageUnit

    @property
    def billed_metric(self) -> UsageMetric:
        return UNIT_BASIS[self.metric][0]

    def exact_charge(self, quantity: int) -> Fraction:
        """Exact micro-units owed for a metered quantity of billed_metric."""
        per = UNIT_BASIS[self.metric][1]
        return Fraction(self.rate.micro_units * quantity, per)

    def billed_quantity(self, quantity: int) -> Fraction:
        return Fraction(quantity, UNIT_BASIS[self.metric][1])


PricingModel = Annotated[Union[PayOnce, Subscription, PayPerUse], Field(discriminator="model")]


def nominal_price(pricing: Union[PayOnce, Subscription, PayPerUse]) -> Money:
    """The headline amount: price for flat models, rate per unit for pay-per-use."""
    if isinstance(pricing, PayPerUse):
        return pricing.rate
    return pricing.price


def describe_pricing(pricing: Union[PayOnce, Subscription, PayPerUse]) -> str:
    if isinstance(pricing, PayOnce):
        return f"{pricing.price} once"
    if isinstance(pricing, Subscription):
        return f"{pricing.price} per {pricing.period_s} s"
    return f"{pricing.rate} per {UNIT_BASIS[pricing.metric][2]}"


def license_active(
    pricing: Union[PayOnce, Subscription, PayPerUse], acquired_at: int, now: int
) -> bool:
    """Whether a license bought at acquired_at still covers now."""
    if now < acquired_at:
        return False
    if isinstance(pricing, Subscription):
        return now < acquired_at + pricing.period_s
    return True


def estimate_charge(
    pricing: Union[PayOnce, Subscription, PayPerUse],
    calls: int = 1,
    nbytes: int = 0,
    seconds: Fraction = Fraction(0),
) -> Money:
    """Price of one use, rounded half up to the micro-unit."""
    if not isinstance(pricing, PayPerUse):
        return nominal_price(pricing)
    quantity = {
        UsageMetric.CALLS: Fraction(calls),
        UsageMetric.BYTES: Fraction(nbytes),
        UsageMetric.SECONDS: Fraction(seconds),
    }[pricing.billed_metric]
    exact = pricing.rate.micro_units * quantity / UNIT_BASIS[pricing.metric][1]
    return Money(micro_units=math.floor(exact + Fraction(1, 2)))


__all__ = [
    "MICRO",
    "PayOnce",
    "PayPerUse",
    "PricingModel",
    "Subscription",
    "UsageUnit",
    "describe_pricing",
    "estimate_charge",
    "license_active",
    "nominal_price",
]
