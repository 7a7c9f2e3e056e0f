"""Shared value types."""

from .assets import (
    GOAL_TAXONOMY,
    AssetDescriptor,
    AssetKind,
    CertificateRequirement,
    Column,
    ColumnType,
    LogicalSignature,
    PipelineEdge,
    PipelineGraph,
    PipelineNode,
    QualityMetric,
    RevenueShareTree,
    Schema,
    TypeRef,
)
from .constraints import (
    AggregatedOnly,
    CompliancePolicy,
    DenyShip,
    NoCrossProviderAggregation,
    NoOverlay,
    UsageConstraint,
    VendorDeny,
)
from .money import MICRO, Money
from .pricing import PayOnce, PayPerUse, PricingModel, Subscription, UsageUnit
from .regions import ANY_REGION, Region
from .usage import AggregatedCounter, UsageEvent, UsageMetric

__all__ = [
    "ANY_REGION",
    "GOAL_TAXONOMY",
    "MICRO",
    "AggregatedCounter",
    "AggregatedOnly",
    "AssetDescriptor",
    "AssetKind",
    "CertificateRequirement",
    "Column",
    "ColumnType",
    "CompliancePolicy",
    "DenyShip",
    "LogicalSignature",
    "Money",
    "NoCrossProviderAggregation",
    "NoOverlay",
    "PayOnce",
    "PayPerUse",
    "PipelineEdge",
    "PipelineGraph",
    "PipelineNode",
    "PricingModel",
    "QualityMetric",
    "Region",
    "RevenueShareTree",
    "Schema",
    "Subscription",
    "TypeRef",
    "UsageConstraint",
    "UsageEvent",
    "UsageMetric",
    "UsageUnit",
    "VendorDeny",
]
