"""
In-process operator evaluation
Hash joins for equi-joins, hash aggregation, bag semantics. Works on site
plans and logical plans alike; SHIP passes its input through.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

from agora.errors import MissingTable
from agora.query.ast import ColumnRef
from agora.query.logical import OpKind
from agora.query.reference import Database, Row, aggregate_values
from agora.query.registry import TableRegistry


@dataclass(frozen=True)
class Relation:
    labels: Tuple[str, ...]
    rows: List[Row]

    def index(self, column: Any) -> int:
        return self.labels.index(str(column))

    def aligned(self, labels: Sequence[str]) -> List[Row]:
        """Rows with columns reordered to `labels`."""
        order = [self.labels.index(label) for label in labels]
        return [tuple(row[i] for i in order) for row in self.rows]


# called once per evaluated node, after its children, with (node, input rows, output)
OperatorHook = Callable[[Any, int, Relation], None]


class Engine:
    def __init__(
        self,
        registry: TableRegistry,
        db: Database,
        on_operator: Optional[OperatorHook] = None,
    ):
        self.registry = registry
        self.db = db
        self.on_operator = on_operator

    def evaluate(self, node: Any) -> Relation:
        inputs = [self.evaluate(child) for child in node.children]
        out = self.apply(node, inputs)
        if self.on_operator is not None:
            rows_in = sum(len(r.rows) for r in inputs) if inputs else len(out.rows)
            self.on_operator(node, rows_in, out)
        return out

    def apply(self, node: Any, inputs: List[Relation]) -> Relation:
        kind = node.kind
        if kind == OpKind.SCAN:
            return self.scan(node.table)
        if kind == OpKind.FILTER:
            child = inputs[0]
            at = child.index(node.predicate.column)
            return Relation(child.labels, [r for r in child.rows if node.predicate.holds(r[at])])
        if kind == OpKind.JOIN:
            return hash_join(node.predicates, inputs[0], inputs[1])
        if kind == OpKind.AGGREGATE:
            return hash_aggregate(node.group_by, node.aggregates, inputs[0])
        if kind == OpKind.PROJECT:
            child = inputs[0]
            positions = [child.index(item) for item in node.items]
            return Relation(
                tuple(str(i) for i in node.items),
                [tuple(r[p] for p in positions) for r in child.rows],
            )
        return inputs[0]

    def scan(self, table: str) -> Relation:
        if table not in self.db:
            raise MissingTable(table)
        return Relation(self.registry.columns(table), list(self.db[table]))


def hash_join(predicates: Sequence[Any], left: Relation, right: Relation) -> Relation:
    left_keys: List[int] = []
    right_keys: List[int] = []
    for predicate in predicates:
        a, b = predicate.left, predicate.right
        if str(a) not in left.labels:
            a, b = b, a
        left_keys.append(left.index(a))
        right_keys.append(right.index(b))

    table: Dict[Tuple[Any, ...], List[Row]] = {}
    for row in right.rows:
        key = tuple(row[i] for i in right_keys)
        if None not in key:
            table.setdefault(key, []).append(row)
    out: List[Row] = []
    for row in left.rows:
        key = tuple(row[i] for i in left_keys)
        for match in table.get(key, ()):
            out.append(row + match)
    return Relation(left.labels + right.labels, out)


def hash_aggregate(
    group_by: Sequence[ColumnRef], aggregates: Sequence[Any], child: Relation
) -> Relation:
    group_positions = [child.index(g) for g in group_by]
    argument_positions = [
        None if call.argument is None else child.index(call.argument) for call in aggregates
    ]
    groups: Dict[Tuple[Any, ...], List[Row]] = {}
    for row in child.rows:
        groups.setdefault(tuple(row[p] for p in group_positions), []).append(row)
    if not group_by and not groups:
        groups[()] = []

    out: List[Row] = []
    for key, members in groups.items():
        values = tuple(
            aggregate_values(call, [None if p is None else r[p] for r in members])
            for call, p in zip(aggregates, argument_positions)
        )
        out.append(key + values)
    labels = tuple(str(g) for g in group_by) + tuple(str(a) for a in aggregates)
    return Relation(labels, out)


def evaluate_plan(node: Any, registry: TableRegistry, db: Mapping[str, Sequence[Row]]) -> Relation:
    return Engine(registry, db).evaluate(node)
