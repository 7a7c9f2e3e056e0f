"""
Site plans
Logical operators annotated with the region they execute in, plus SHIP
nodes that move an intermediate result between regions. Every node carries
its lineage tags and estimated output (rows, row_bytes).
"""

from dataclasses import dataclass
from typing import FrozenSet, List, Optional, Tuple

from agora.models.regions import Region
from agora.query.ast import AggregateCall, ColumnRef, FilterPredicate, JoinPredicate, SelectItem
from agora.query.logical import OpKind


@dataclass(frozen=True, order=True)
class LineageTag:
    source_table: str
    origin_region: Region
    aggregated: bool = False

    def __str__(self) -> str:
        suffix = "*" if self.aggregated else ""
        return f"{self.source_table}/{self.origin_region.value}{suffix}"


@dataclass(frozen=True)
class SiteNode:
    kind: OpKind
    region: Region  # execution region; for SHIP the destination
    children: Tuple["SiteNode", ...] = ()
    table: Optional[str] = None
    predicate: Optional[FilterPredicate] = None
    predicates: Tuple[JoinPredicate, ...] = ()
    group_by: Tuple[ColumnRef, ...] = ()
    aggregates: Tuple[AggregateCall, ...] = ()
    items: Tuple[SelectItem, ...] = ()
    source_region: Optional[Region] = None  # SHIP only
    lineage: FrozenSet[LineageTag] = frozenset()
    rows: float = 0.0
    row_bytes: int = 0
    columns: Tuple[str, ...] = ()

    @property
    def child(self) -> "SiteNode":
        return self.children[0]

    @property
    def is_ship(self) -> bool:
        return self.kind == OpKind.SHIP

    @property
    def output_bytes(self) -> float:
        return self.rows * self.row_bytes


SitePlan = SiteNode


def walk(node: SiteNode) -> List[SiteNode]:
    """Nodes in post-order, children left to right."""
    out: List[SiteNode] = []
    for child in node.children:
        out.extend(walk(child))
    out.append(node)
    return out


def ships(node: SiteNode) -> List[SiteNode]:
    return [n for n in walk(node) if n.is_ship]


def ship_route(node: SiteNode) -> str:
    return f"{node.source_region.value if node.source_region else '?'}->{node.region.value}"


def node_label(node: SiteNode) -> str:
    """One-line rendering used by plan text and canonical ordering."""
    region = node.region.value
    if node.kind == OpKind.SHIP:
        return f"SHIP {ship_route(node)}"
    if node.kind == OpKind.SCAN:
        return f"SCAN@{region} {node.table}"
    if node.kind == OpKind.FILTER:
        return f"FILTER@{region} {node.predicate}"
    if node.kind == OpKind.JOIN:
        return f"JOIN@{region} (" + " AND ".join(str(p) for p in node.predicates) + ")"
    if node.kind == OpKind.AGGREGATE:
        group = ", ".join(str(g) for g in node.group_by)
        aggs = ", ".join(str(a) for a in node.aggregates)
        return f"AGGREGATE@{region} group=({group}) aggs=({aggs})"
    return f"PROJECT@{region} (" + ", ".join(str(i) for i in node.items) + ")"


def serialize(node: SiteNode) -> str:
    if not node.children:
        return node_label(node)
    return node_label(node) + "[" + "; ".join(serialize(c) for c in node.children) + "]"
