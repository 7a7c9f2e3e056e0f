"""
Data-movement cost model
cost = sum over SHIPs of shipped bytes x per-byte rate
     + sum over other operators of input rows x per-row CPU cost
"""

import math
from typing import Dict, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator

from agora.models.regions import Region
from agora.query.logical import OpKind
from agora.query.registry import TableRegistry

from .cardinality import CardinalityEstimator
from .siteplan import SiteNode, walk


def route_key(source: Region, destination: Region) -> str:
    return f"{source.value}->{destination.value}"


class CostModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    default_ship_cost_per_byte: float = Field(default=0.01, ge=0)
    # keyed "EU->NA"; looked up in both directions when symmetric
    ship_cost_per_byte: Dict[str, float] = Field(default_factory=dict)
    symmetric: bool = True
    cpu_cost_per_row: float = Field(default=0.001, ge=0)
    filter_selectivity_default: float = Field(default=0.1, gt=0, le=1)

    @field_validator("default_ship_cost_per_byte", "cpu_cost_per_row")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("must be finite")
        return value

    @field_validator("ship_cost_per_byte")
    @classmethod
    def _routes(cls, value: Dict[str, float]) -> Dict[str, float]:
        regions = {r.value for r in Region}
        for key, rate in value.items():
            parts = key.split("->")
            if len(parts) != 2 or not set(parts) <= regions or parts[0] == parts[1]:
                raise ValueError(f"route {key!r} is not of the form FROM->TO")
            if not math.isfinite(rate) or rate < 0:
                raise ValueError(f"rate for {key} must be finite and non-negative")
        return value

    def ship_rate(self, source: Region, destination: Region) -> float:
        if source == destination:
            return 0.0
        rate = self.ship_cost_per_byte.get(route_key(source, destination))
        if rate is None and self.symmetric:
            rate = self.ship_cost_per_byte.get(route_key(destination, source))
        return self.default_ship_cost_per_byte if rate is None else rate


def estimate_cost(
    plan: SiteNode, cost_model: CostModel, registry: Optional[TableRegistry] = None
) -> float:
    """Cost of a site plan.

    With a registry, cardinalities are recomputed from table statistics;
    without one the plan's own (rows, row_bytes) annotations are used.
    """
    estimator = (
        CardinalityEstimator(registry, cost_model.filter_selectivity_default)
        if registry is not None
        else None
    )
    rows: Dict[int, float] = {}
    widths: Dict[int, int] = {}
    total = 0.0
    for node in walk(plan):
        child_rows = [rows[id(c)] for c in node.children]
        if estimator is not None:
            rows[id(node)] = estimator.output_rows(node, child_rows)
            widths[id(node)] = estimator.output_width(node, [widths[id(c)] for c in node.children])
        else:
            rows[id(node)], widths[id(node)] = node.rows, node.row_bytes
        if node.kind == OpKind.SHIP:
            child = node.child
            shipped = rows[id(child)] * widths[id(child)]
            total += shipped * cost_model.ship_rate(node.source_region or node.region, node.region)
        elif node.kind == OpKind.SCAN:
            total += rows[id(node)] * cost_model.cpu_cost_per_row
        else:
            total += sum(child_rows) * cost_model.cpu_cost_per_row
    return total
