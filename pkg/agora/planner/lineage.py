"""
Lineage and compliance
A SHIP is judged by the region it leaves and by the origin regions of the
raw data inside what it moves: it breaks a policy on region f only when it
leaves f carrying non-aggregated data that originated in f.
"""

from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Tuple, Union

from agora.models.constraints import AggregatedOnly, DenyShip
from agora.models.regions import ANY_REGION, Region
from agora.query.logical import OpKind

from .siteplan import LineageTag, SiteNode, walk

Policy = Union[DenyShip, AggregatedOnly]


def lineage_tags(node: SiteNode) -> FrozenSet[LineageTag]:
    """Recompute a subtree's tags from its scans, ignoring cached annotations."""
    if node.kind == OpKind.SCAN:
        return frozenset({LineageTag(node.table or "", node.region, False)})
    tags: FrozenSet[LineageTag] = frozenset().union(*(lineage_tags(c) for c in node.children))
    if node.kind == OpKind.AGGREGATE:
        return frozenset(LineageTag(t.source_table, t.origin_region, True) for t in tags)
    return tags


def violates(
    policy: Policy, source: Region, destination: Region, tags: Iterable[LineageTag]
) -> bool:
    """Whether a SHIP from `source` to `destination` of data with these tags breaks the policy.

    Only ships leaving the policy's origin are judged, and only raw
    (non-aggregated) tags from that origin count.
    """
    if source != policy.origin:
        return False
    if isinstance(policy, DenyShip):
        if policy.destination != ANY_REGION and policy.destination != destination:
            return False
    return any(t.origin_region == policy.origin and not t.aggregated for t in tags)


def ship_violations(
    source: Region,
    destination: Region,
    tags: Iterable[LineageTag],
    policies: Iterable[Policy],
) -> List[Policy]:
    tags = tuple(tags)
    return [p for p in policies if violates(p, source, destination, tags)]


@dataclass(frozen=True)
class ComplianceReport:
    """Violations of one site plan; empty means compliant"""

    violations: Tuple[Tuple[SiteNode, Policy], ...] = ()

    @property
    def compliant(self) -> bool:
        return not self.violations

    def describe(self) -> List[str]:
        return [
            f"SHIP {ship.source_region.value if ship.source_region else '?'}->"
            f"{ship.region.value} violates {policy}"
            for ship, policy in self.violations
        ]


def check_plan(plan: SiteNode, policies: Iterable[Policy]) -> ComplianceReport:
    """Every (ship, policy) pair in violation, with lineage recomputed per ship."""
    policies = list(policies)
    found: List[Tuple[SiteNode, Policy]] = []
    for node in walk(plan):
        if node.kind != OpKind.SHIP:
            continue
        child = node.child
        source = node.source_region or child.region
        for policy in ship_violations(source, node.region, lineage_tags(child), policies):
            found.append((node, policy))
    return ComplianceReport(violations=tuple(found))
