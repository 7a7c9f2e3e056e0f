"""
Logical relational algebra and lowering from SELECT specs

The lowered tree is canonical and left-deep: filters sit on their scans,
tables join in source order (each next table connected to the prefix), and
at most one Aggregate and one Project sit above all joins.
"""

from dataclasses import dataclass
from enum import Enum
from typing import ClassVar, Dict, List, Tuple, Union

import networkx as nx

from agora.errors import AggregateMisuse, DisconnectedJoinGraph, InvalidQuery, UnknownTable
from agora.models.assets import ColumnType

from .ast import (
    AggregateCall,
    ColumnRef,
    FilterPredicate,
    JoinPredicate,
    SelectItem,
    SelectSpec,
)
from .registry import TableRegistry


class OpKind(str, Enum):
    SCAN = "SCAN"
    FILTER = "FILTER"
    PROJECT = "PROJECT"
    JOIN = "JOIN"
    AGGREGATE = "AGGREGATE"
    SHIP = "SHIP"


@dataclass(frozen=True)
class Scan:
    kind: ClassVar[OpKind] = OpKind.SCAN
    table: str

    @property
    def children(self) -> Tuple["LogicalNode", ...]:
        return ()


@dataclass(frozen=True)
class Filter:
    kind: ClassVar[OpKind] = OpKind.FILTER
    predicate: FilterPredicate
    child: "LogicalNode"

    @property
    def children(self) -> Tuple["LogicalNode", ...]:
        return (self.child,)


@dataclass(frozen=True)
class Join:
    kind: ClassVar[OpKind] = OpKind.JOIN
    predicates: Tuple[JoinPredicate, ...]
    left: "LogicalNode"
    right: "LogicalNode"

    @property
    def children(self) -> Tuple["LogicalNode", ...]:
        return (self.left, self.right)


@dataclass(frozen=True)
class Aggregate:
    kind: ClassVar[OpKind] = OpKind.AGGREGATE
    group_by: Tuple[ColumnRef, ...]
    aggregates: Tuple[AggregateCall, ...]
    child: "LogicalNode"

    @property
    def children(self) -> Tuple["LogicalNode", ...]:
        return (self.child,)


@dataclass(frozen=True)
class Project:
    kind: ClassVar[OpKind] = OpKind.PROJECT
    items: Tuple[SelectItem, ...]
    child: "LogicalNode"

    @property
    def children(self) -> Tuple["LogicalNode", ...]:
        return (self.child,)


LogicalNode = Union[Scan, Filter, Join, Aggregate, Project]
LogicalPlan = LogicalNode

NUMERIC = (ColumnType.INT64, ColumnType.FLOAT64)


def _literal_fits(column_type: ColumnType, value: object) -> bool:
    if column_type == ColumnType.BOOL:
        return isinstance(value, bool)
    if isinstance(value, bool):
        return False
    if column_type in NUMERIC:
        return isinstance(value, (int, float))
    return isinstance(value, str)


def resolve_select(q: SelectSpec, registry: TableRegistry) -> SelectSpec:
    """Qualify every column reference and type-check filters."""
    if len(set(q.tables)) != len(q.tables):
        raise InvalidQuery("a table may appear only once in FROM")
    for table in q.tables:
        if table not in registry:
            raise UnknownTable(table)

    def qualify(ref: ColumnRef) -> ColumnRef:
        return registry.resolve(ref, q.tables)

    def qualify_item(item: SelectItem) -> SelectItem:
        if isinstance(item, AggregateCall):
            if item.argument is None:
                return item
            resolved = qualify(item.argument)
            if item.function in ("SUM", "AVG"):
                if registry.column_def(resolved).type not in NUMERIC:
                    raise InvalidQuery(f"{item.function} needs a numeric column, got {resolved}")
            return AggregateCall(item.function, resolved)
        return qualify(item)

    predicates: List[Union[JoinPredicate, FilterPredicate]] = []
    for predicate in q.predicates:
        if isinstance(predicate, JoinPredicate):
            left, right = qualify(predicate.left), qualify(predicate.right)
            if left.table == right.table:
                raise InvalidQuery(f"predicate {left} = {right} compares columns of one table")
            predicates.append(JoinPredicate(left, right))
        else:
            column = qualify(predicate.column)
            if not _literal_fits(registry.column_def(column).type, predicate.value):
                raise InvalidQuery(f"literal in {predicate} does not match the column type")
            predicates.append(FilterPredicate(column, predicate.op, predicate.value))

    return SelectSpec(
        projections=tuple(qualify_item(p) for p in q.projections),
        tables=q.tables,
        predicates=tuple(predicates),
        group_by=tuple(qualify(g) for g in q.group_by),
        target_region=q.target_region,
    )


def check_connected(tables: Tuple[str, ...], joins: List[JoinPredicate]) -> None:
    graph = nx.Graph()
    graph.add_nodes_from(tables)
    graph.add_edges_from((j.left.table, j.right.table) for j in joins)
    if not nx.is_connected(graph):
        order = {t: i for i, t in enumerate(tables)}
        components = sorted(
            (sorted(c, key=order.__getitem__) for c in nx.connected_components(graph)),
            key=lambda c: order[c[0]],
        )
        raise DisconnectedJoinGraph(components)


def check_grouping(q: SelectSpec) -> None:
    grouped = bool(q.group_by) or bool(q.aggregates)
    if not grouped:
        return
    if q.star:
        raise AggregateMisuse("*")
    keys = set(q.group_by)
    for item in q.projections:
        if isinstance(item, ColumnRef) and item not in keys:
            raise AggregateMisuse(str(item))


def to_logical_plan(q: SelectSpec, registry: TableRegistry) -> LogicalPlan:
    """Lower a SELECT to the canonical left-deep tree."""
    q = resolve_select(q, registry)
    joins = [p for p in q.predicates if isinstance(p, JoinPredicate)]
    filters = [p for p in q.predicates if isinstance(p, FilterPredicate)]
    check_connected(q.tables, joins)
    check_grouping(q)

    base: Dict[str, LogicalNode] = {}
    for table in q.tables:
        node: LogicalNode = Scan(table)
        for predicate in filters:
            if predicate.column.table == table:
                node = Filter(predicate, node)
        base[table] = node

    joined = [q.tables[0]]
    tree: LogicalNode = base[q.tables[0]]
    remaining = list(q.tables[1:])
    while remaining:
        for table in remaining:
            linking = tuple(
                j
                for j in joins
                if (j.left.table == table and j.right.table in joined)
                or (j.right.table == table and j.left.table in joined)
            )
            if linking:
                break
        tree = Join(linking, tree, base[table])
        joined.append(table)
        remaining.remove(table)

    if q.group_by or q.aggregates:
        tree = Aggregate(q.group_by, _unique(q.aggregates), tree)
    if not q.star:
        tree = Project(q.projections, tree)
    return tree


def _unique(calls: Tuple[AggregateCall, ...]) -> Tuple[AggregateCall, ...]:
    return tuple(dict.fromkeys(calls))


def walk(node: LogicalNode) -> List[LogicalNode]:
    """Nodes in post-order."""
    out: List[LogicalNode] = []
    for child in node.children:
        out.extend(walk(child))
    out.append(node)
    return out


def output_columns(node: LogicalNode, registry: TableRegistry) -> Tuple[str, ...]:
    if isinstance(node, Scan):
        return registry.columns(node.table)
    if isinstance(node, Join):
        return output_columns(node.left, registry) + output_columns(node.right, registry)
    if isinstance(node, Aggregate):
        return tuple(str(g) for g in node.group_by) + tuple(str(a) for a in node.aggregates)
    if isinstance(node, Project):
        return tuple(str(i) for i in node.items)
    return output_columns(node.child, registry)


def count_joins(node: LogicalNode) -> int:
    return sum(1 for n in walk(node) if isinstance(n, Join))
