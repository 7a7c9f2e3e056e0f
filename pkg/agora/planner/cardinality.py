"""
Cardinality and row-width estimation

Rules apply to logical nodes and site nodes alike; they dispatch on the
node's `kind` and read the same attribute names from both.
"""

from typing import Any, Sequence

from agora.query.ast import AggregateCall, ColumnRef
from agora.query.logical import OpKind
from agora.query.registry import AGGREGATE_WIDTH, TableRegistry

DEFAULT_SELECTIVITY = 0.1


class CardinalityEstimator:
    """Deterministic independence-assumption estimates from registered stats"""

    def __init__(self, registry: TableRegistry, default_selectivity: float = DEFAULT_SELECTIVITY):
        self.registry = registry
        self.default_selectivity = default_selectivity

    # -- single-node rules ----------------------------------------------------

    def selectivity(self, node: Any) -> float:
        predicate = node.predicate
        if predicate.op == "=":
            return 1.0 / self.registry.distinct(predicate.column)
        return self.default_selectivity

    def output_rows(self, node: Any, child_rows: Sequence[float]) -> float:
        kind = node.kind
        if kind == OpKind.SCAN:
            return float(self.registry.stats(node.table).table.row_count)
        if kind == OpKind.FILTER:
            return child_rows[0] * self.selectivity(node)
        if kind == OpKind.JOIN:
            rows = child_rows[0] * child_rows[1]
            for predicate in node.predicates:
                rows /= max(
                    self.registry.distinct(predicate.left),
                    self.registry.distinct(predicate.right),
                )
            return rows
        if kind == OpKind.AGGREGATE:
            groups = 1.0
            for column in node.group_by:
                groups *= self.registry.distinct(column)
            return min(child_rows[0], groups)
        return child_rows[0]

    def output_width(self, node: Any, child_widths: Sequence[int]) -> int:
        kind = node.kind
        if kind == OpKind.SCAN:
            return self.registry.stats(node.table).table.row_bytes
        if kind == OpKind.JOIN:
            return child_widths[0] + child_widths[1]
        if kind == OpKind.AGGREGATE:
            return sum(self.registry.width(g) for g in node.group_by) + AGGREGATE_WIDTH * len(
                node.aggregates
            )
        if kind == OpKind.PROJECT:
            return sum(self.item_width(i) for i in node.items)
        return child_widths[0]

    def item_width(self, item: Any) -> int:
        if isinstance(item, AggregateCall):
            return AGGREGATE_WIDTH
        assert isinstance(item, ColumnRef)
        return self.registry.width(item)

    # -- whole subtrees -------------------------------------------------------

    def rows(self, node: Any) -> float:
        return self.output_rows(node, [self.rows(c) for c in node.children])

    def width(self, node: Any) -> int:
        return self.output_width(node, [self.width(c) for c in node.children])


def estimate_cardinality(
    node: Any, registry: TableRegistry, default_selectivity: float = DEFAULT_SELECTIVITY
) -> float:
    """Estimated output rows of a logical or site subtree; raises MissingStats."""
    return CardinalityEstimator(registry, default_selectivity).rows(node)
