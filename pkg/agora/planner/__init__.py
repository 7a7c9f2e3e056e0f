"""
Compliant geo-distributed planning: site plans, lineage, cost and search
"""

from .builder import SitePlanBuilder
from .cardinality import CardinalityEstimator, estimate_cardinality
from .cost import CostModel, estimate_cost
from .explain import NC_VERDICT, OperatorSlot, plan_operators, relational_signature, render_plan
from .lineage import ComplianceReport, check_plan, lineage_tags
from .optimizer import MAX_TABLES, OptimizedPlan, decompose, optimize, plan_query
from .siteplan import LineageTag, SiteNode, SitePlan, serialize, ships, walk

__all__ = [
    "MAX_TABLES",
    "NC_VERDICT",
    "CardinalityEstimator",
    "ComplianceReport",
    "CostModel",
    "LineageTag",
    "OperatorSlot",
    "OptimizedPlan",
    "SiteNode",
    "SitePlan",
    "SitePlanBuilder",
    "check_plan",
    "decompose",
    "estimate_cardinality",
    "estimate_cost",
    "lineage_tags",
    "optimize",
    "plan_operators",
    "plan_query",
    "relational_signature",
    "render_plan",
    "serialize",
    "ships",
    "walk",
]
