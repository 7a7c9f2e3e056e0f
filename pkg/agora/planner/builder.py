"""
Site plan construction with lineage and estimates filled in
"""

from dataclasses import replace
from typing import Sequence

from agora.models.regions import Region
from agora.query.ast import AggregateCall, ColumnRef, FilterPredicate, JoinPredicate, SelectItem
from agora.query.logical import OpKind
from agora.query.registry import TableRegistry

from .cardinality import DEFAULT_SELECTIVITY, CardinalityEstimator
from .siteplan import LineageTag, SiteNode


class SitePlanBuilder:
    """Builds SiteNodes whose lineage, rows and row_bytes are consistent"""

    def __init__(self, registry: TableRegistry, default_selectivity: float = DEFAULT_SELECTIVITY):
        self.registry = registry
        self.estimator = CardinalityEstimator(registry, default_selectivity)

    def _finish(self, node: SiteNode) -> SiteNode:
        rows = self.estimator.output_rows(node, [c.rows for c in node.children])
        width = self.estimator.output_width(node, [c.row_bytes for c in node.children])
        return replace(node, rows=rows, row_bytes=width)

    def scan(self, table: str) -> SiteNode:
        region = self.registry.region(table)
        return self._finish(
            SiteNode(
                kind=OpKind.SCAN,
                region=region,
                table=table,
                lineage=frozenset({LineageTag(table, region, False)}),
                columns=self.registry.columns(table),
            )
        )

    def filter(self, predicate: FilterPredicate, child: SiteNode) -> SiteNode:
        return self._finish(
            SiteNode(
                kind=OpKind.FILTER,
                region=child.region,
                children=(child,),
                predicate=predicate,
                lineage=child.lineage,
                columns=child.columns,
            )
        )

    def ship(self, child: SiteNode, destination: Region) -> SiteNode:
        if child.is_ship:
            raise ValueError("a SHIP result is shipped again; ship its input instead")
        if child.region == destination:
            raise ValueError(f"SHIP within {destination.value}")
        return self._finish(
            SiteNode(
                kind=OpKind.SHIP,
                region=destination,
                children=(child,),
                source_region=child.region,
                lineage=child.lineage,
                columns=child.columns,
            )
        )

    def place(self, child: SiteNode, region: Region) -> SiteNode:
        """The child's output made available at `region`."""
        return child if child.region == region else self.ship(child, region)

    def join(
        self,
        predicates: Sequence[JoinPredicate],
        left: SiteNode,
        right: SiteNode,
        region: Region,
    ) -> SiteNode:
        left, right = self.place(left, region), self.place(right, region)
        return self._finish(
            SiteNode(
                kind=OpKind.JOIN,
                region=region,
                children=(left, right),
                predicates=tuple(predicates),
                lineage=left.lineage | right.lineage,
                columns=left.columns + right.columns,
            )
        )

    def aggregate(
        self,
        group_by: Sequence[ColumnRef],
        aggregates: Sequence[AggregateCall],
        child: SiteNode,
        region: Region,
    ) -> SiteNode:
        child = self.place(child, region)
        return self._finish(
            SiteNode(
                kind=OpKind.AGGREGATE,
                region=region,
                children=(child,),
                group_by=tuple(group_by),
                aggregates=tuple(aggregates),
                lineage=frozenset(
                    LineageTag(t.source_table, t.origin_region, True) for t in child.lineage
                ),
                columns=tuple(str(g) for g in group_by) + tuple(str(a) for a in aggregates),
            )
        )

    def project(self, items: Sequence[SelectItem], child: SiteNode) -> SiteNode:
        return self._finish(
            SiteNode(
                kind=OpKind.PROJECT,
                region=child.region,
                children=(child,),
                items=tuple(items),
                lineage=child.lineage,
                columns=tuple(str(i) for i in items),
            )
        )
