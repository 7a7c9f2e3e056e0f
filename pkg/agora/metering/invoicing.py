"""
Invoicing
Pay-per-use lines bill the exact rational charge of the period, floored once
per line to micro-units, so no line ever exceeds its exact charge. Flat
models bill independently of usage.
"""

import math
from collections import defaultdict
from fractions import Fraction
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict, TypeAdapter, ValidationError, model_validator

from agora.assets.codec import schema_error
from agora.errors import DocumentSyntaxError, MissingPricing
from agora.models.assets import Rational
from agora.models.money import Money
from agora.models.pricing import (
    PayOnce,
    PayPerUse,
    PricingModel,
    Subscription,
    describe_pricing,
)
from agora.models.usage import AggregatedCounter, UsageMetric

logger = structlog.get_logger(__name__)

Pricing = Union[PayOnce, Subscription, PayPerUse]
PRICING_MAP = TypeAdapter(Dict[str, PricingModel])


class InvoiceLine(BaseModel):
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    asset: str
    metric: Optional[UsageMetric] = None  # None for flat lines
    quantity: Rational
    rate: str
    amount: Money


class Invoice(BaseModel):
    model_config = ConfigDict(frozen=True)

    period_start: int
    period_end: int
    lines: Tuple[InvoiceLine, ...] = ()
    total: Money = Money.zero()

    @model_validator(mode="after")
    def _total_matches(self) -> "Invoice":
        if sum((line.amount for line in self.lines), Money.zero()) != self.total:
            raise ValueError("invoice total differs from the sum of its lines")
        return self

    def render(self) -> str:
        """Plain-text table."""
        header = ("asset", "metric", "quantity", "rate", "amount")
        rows = [
            (
                line.asset,
                line.metric.value if line.metric else "-",
                _quantity_text(line.quantity),
                line.rate,
                str(line.amount),
            )
            for line in self.lines
        ]
        widths = [max(len(r[i]) for r in [header, *rows]) for i in range(len(header))]

        def fmt(row: Tuple[str, ...]) -> str:
            cells = [row[i].ljust(widths[i]) for i in range(len(row) - 1)]
            cells.append(row[-1].rjust(widths[-1]))
            return "  ".join(cells).rstrip()

        lines = [f"invoice period {self.period_start}..{self.period_end}", fmt(header)]
        lines.extend(fmt(r) for r in rows)
        lines.append(f"total {self.total}")
        return "\n".join(lines) + "\n"

    def document(self) -> str:
        return self.model_dump_json()


def _quantity_text(quantity: Fraction) -> str:
    if quantity.denominator == 1:
        return str(quantity.numerator)
    return f"{float(quantity):.6f}".rstrip("0").rstrip(".")


def parse_period(text: str) -> Tuple[int, int]:
    """"<start>..<end>" in integer seconds, start < end."""
    start, sep, end = text.partition("..")
    if not sep:
        raise ValueError(f"period {text!r} is not <start>..<end>")
    first, last = int(start), int(end)
    if last <= first:
        raise ValueError(f"period {text!r} is empty")
    return first, last


def make_invoice(
    counters: Iterable[AggregatedCounter],
    pricing: Mapping[str, Pricing],
    period: Tuple[int, int],
) -> Invoice:
    """Bill counters whose window starts inside the period.

    Raises MissingPricing for a metered asset without a pricing entry.
    """
    start, end = period
    totals: Dict[Tuple[str, UsageMetric], int] = defaultdict(int)
    for counter in counters:
        if start <= counter.window_start < end:
            totals[(counter.asset, counter.metric)] += counter.total
    for asset, _ in totals:
        if asset not in pricing:
            raise MissingPricing(asset)

    metered: List[Tuple[str, UsageMetric, Fraction, str, Fraction]] = []
    flat: List[InvoiceLine] = []
    for asset in sorted(pricing):
        model = pricing[asset]
        if isinstance(model, PayPerUse):
            quantity = totals.get((asset, model.billed_metric), 0)
            if quantity:
                metered.append(
                    (
                        asset,
                        model.billed_metric,
                        model.billed_quantity(quantity),
                        describe_pricing(model),
                        model.exact_charge(quantity),
                    )
                )
        elif isinstance(model, Subscription):
            periods = math.ceil((end - start) / model.period_s)
            flat.append(
                InvoiceLine(
                    asset=asset,
                    quantity=Fraction(periods),
                    rate=describe_pricing(model),
                    amount=model.price * periods,
                )
            )
        else:
            flat.append(
                InvoiceLine(
                    asset=asset,
                    quantity=Fraction(1),
                    rate=describe_pricing(model),
                    amount=model.price,
                )
            )

    # each metered line is floored on its own; sub-micro remainders are never billed
    lines = [
        InvoiceLine(
            asset=a, metric=metric, quantity=q, rate=rate, amount=Money.micro(math.floor(exact))
        )
        for a, metric, q, rate, exact in metered
    ]
    lines.extend(flat)
    lines.sort(key=lambda line: (line.asset, line.metric.value if line.metric else ""))
    total = sum((line.amount for line in lines), Money.zero())
    logger.info("invoice_made", period=f"{start}..{end}", lines=len(lines), total=total.micro_units)
    return Invoice(period_start=start, period_end=end, lines=tuple(lines), total=total)


def load_pricing(path: Union[str, Path]) -> Dict[str, Pricing]:
    """A JSON object mapping asset id to pricing model."""
    document = Path(path).read_bytes()
    try:
        return dict(PRICING_MAP.validate_json(document))
    except ValidationError as exc:
        if any(e["type"] == "json_invalid" for e in exc.errors()):
            raise DocumentSyntaxError(0, "pricing file is not JSON") from exc
        raise schema_error(exc) from exc
