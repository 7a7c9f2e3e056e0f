"""
Descriptor validation
Pydantic guarantees the document shape; this module checks the semantic
invariants and reports each broken rule as data.
"""

import math
import re
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

from agora.errors import CompositionError
from agora.models.assets import (
    GOAL_TAXONOMY,
    MAX_ID_LENGTH,
    MAX_SHARE_DEPTH,
    REGIONAL_KINDS,
    AssetDescriptor,
    AssetKind,
    RevenueShareTree,
    Schema,
    TypeRef,
)
from agora.models.constraints import VendorDeny
from agora.models.pricing import PayPerUse, Subscription, nominal_price

from .composition import check_pipeline_graph

ASSET_ID_PATTERN = re.compile(r"^[A-Za-z0-9._~-]+$")

Resolver = Callable[[str], Optional[AssetDescriptor]]


class Violation(BaseModel):
    model_config = ConfigDict(frozen=True)

    field: str
    rule: str

    def __str__(self) -> str:
        return f"{self.field}: {self.rule}"


class ValidationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    violations: Tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def rules(self) -> List[str]:
        return [v.rule for v in self.violations]


def check_asset_id(value: str) -> Optional[str]:
    if not value:
        return "id must be non-empty"
    if len(value) > MAX_ID_LENGTH:
        return f"id longer than {MAX_ID_LENGTH} characters"
    if not ASSET_ID_PATTERN.match(value):
        return "id must use the URL-safe charset"
    return None


def share_tree_problems(
    tree: RevenueShareTree, path: str = "revenue_share"
) -> List[Tuple[str, str]]:
    """(field, rule) pairs for every broken share-tree rule."""
    problems: List[Tuple[str, str]] = []
    if path == "revenue_share" and tree.share != 1:
        problems.append((path, f"root share {tree.share} ≠ 1"))
    if tree.depth() > MAX_SHARE_DEPTH:
        problems.append((path, f"depth {tree.depth()} exceeds {MAX_SHARE_DEPTH}"))

    def walk(node: RevenueShareTree, where: str) -> None:
        if not node.beneficiary:
            problems.append((where, "beneficiary must be non-empty"))
        if node.share < 0:
            problems.append((where, f"share {node.share} is negative"))
        if node.children:
            total = sum((c.share for c in node.children), Fraction(0))
            if total != 1:
                problems.append((where, f"shares sum {total} ≠ 1"))
            for i, child in enumerate(node.children):
                walk(child, f"{where}.children.{i}")

    walk(tree, path)
    return problems


def _schema_problems(ref: TypeRef, where: str) -> List[Tuple[str, str]]:
    if not isinstance(ref, Schema):
        return [] if ref.strip() else [(where, "category must be non-empty")]
    names = [c.name for c in ref.columns]
    problems = []
    if len(set(names)) != len(names):
        problems.append((where, "column names must be unique"))
    if any(not n for n in names):
        problems.append((where, "column names must be non-empty"))
    return problems


def validate_descriptor(
    descriptor: AssetDescriptor, resolve: Optional[Resolver] = None
) -> ValidationReport:
    """Check every descriptor invariant.

    With `resolve`, pipeline graphs are also type-checked against the assets
    their nodes reference; references it cannot resolve get structural checks
    only, since components may live in another marketplace.
    """
    found: List[Tuple[str, str]] = []
    d = descriptor

    problem = check_asset_id(d.id)
    if problem:
        found.append(("id", problem))
    if not d.name.strip():
        found.append(("name", "name must be non-empty"))
    if not d.provider.strip():
        found.append(("provider", "provider must be non-empty"))

    if d.kind == AssetKind.PIPELINE and (d.graph is None or not d.graph.nodes):
        found.append(("graph", "pipeline requires graph"))
    if d.kind != AssetKind.PIPELINE and d.graph is not None:
        found.append(("graph", "only pipelines carry a graph"))
    if d.kind in REGIONAL_KINDS and d.region is None:
        found.append(("region", f"{d.kind.value} requires region"))

    goal = d.signature.goal.strip().lower()
    if goal not in GOAL_TAXONOMY:
        found.append(("signature.goal", f"goal {d.signature.goal!r} not in taxonomy"))
    for i, ref in enumerate(d.signature.input_types):
        found.extend(_schema_problems(ref, f"signature.input_types.{i}"))
    found.extend(_schema_problems(d.signature.output_type, "signature.output_type"))
    output = d.signature.output_type
    if d.kind == AssetKind.DATA_SOURCE and isinstance(output, Schema) and not output.columns:
        found.append(("signature.output_type", "relational data source requires columns"))

    for i, metric in enumerate(d.quality):
        if not metric.name.strip():
            found.append((f"quality.{i}.name", "metric name must be non-empty"))
        if not math.isfinite(metric.value) or metric.value < 0:
            found.append((f"quality.{i}.value", "metric value must be finite and non-negative"))

    if nominal_price(d.pricing).micro_units < 0:
        found.append(("pricing", "amounts must be non-negative"))
    if isinstance(d.pricing, Subscription) and d.pricing.period_s <= 0:
        found.append(("pricing.period_s", "period must be positive"))
    if isinstance(d.pricing, PayPerUse) and d.pricing.rate.micro_units < 0:
        found.append(("pricing.rate", "rate must be non-negative"))

    for i, requirement in enumerate(d.required_certificates):
        if not requirement.property.strip():
            found.append((f"required_certificates.{i}.property", "property must be non-empty"))
        if not requirement.trusted_authorities:
            found.append(
                (f"required_certificates.{i}.trusted_authorities", "at least one authority")
            )
    for i, constraint in enumerate(d.usage_constraints):
        if isinstance(constraint, VendorDeny) and not constraint.consumers:
            found.append((f"usage_constraints.{i}.consumers", "vendor deny names no consumer"))

    if d.revenue_share is not None:
        found.extend(share_tree_problems(d.revenue_share))

    if d.graph is not None and d.graph.nodes:
        resolved: Dict[str, AssetDescriptor] = {}
        if resolve is not None:
            for node in d.graph.nodes:
                target = resolve(node.asset_ref)
                if target is not None:
                    resolved[node.node_id] = target
        try:
            check_pipeline_graph(d.graph, resolved)
        except CompositionError as exc:
            found.append(("graph", str(exc)))

    return ValidationReport(violations=tuple(Violation(field=f, rule=r) for f, r in found))
