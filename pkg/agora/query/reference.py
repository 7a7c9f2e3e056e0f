"""
Nested-loop reference evaluator

Evaluates a SELECT directly over in-memory tables, with no planning. It is
the oracle the lowered and optimized plans are checked against.
"""

from typing import Any, Dict, Iterator, List, Mapping, Sequence, Tuple

from agora.errors import ArithmeticOverflow, MissingTable
from agora.models.money import INT64_MAX, INT64_MIN

from .ast import AggregateCall, ColumnRef, FilterPredicate, JoinPredicate, SelectSpec
from .logical import resolve_select
from .registry import TableRegistry

Row = Tuple[Any, ...]
Database = Mapping[str, Sequence[Row]]


def _bindings(
    spec: SelectSpec, registry: TableRegistry, db: Database
) -> Iterator[Dict[ColumnRef, Any]]:
    positions = {
        t: {c.name: i for i, c in enumerate(registry.table(t).columns)} for t in spec.tables
    }

    def value(binding: Dict[str, Row], ref: ColumnRef) -> Any:
        return binding[ref.table][positions[ref.table][ref.column]]  # type: ignore[index]

    def ready(predicate: Any, bound: Dict[str, Row]) -> bool:
        if isinstance(predicate, JoinPredicate):
            return predicate.left.table in bound and predicate.right.table in bound
        return predicate.column.table in bound

    def passes(predicate: Any, bound: Dict[str, Row]) -> bool:
        if isinstance(predicate, JoinPredicate):
            left, right = value(bound, predicate.left), value(bound, predicate.right)
            return left is not None and left == right
        return predicate.holds(value(bound, predicate.column))

    def extend(depth: int, bound: Dict[str, Row]) -> Iterator[Dict[str, Row]]:
        if depth == len(spec.tables):
            yield dict(bound)
            return
        table = spec.tables[depth]
        for row in db[table]:
            bound[table] = row
            checks = [p for p in spec.predicates if _touches(p, table) and ready(p, bound)]
            if all(passes(p, bound) for p in checks):
                yield from extend(depth + 1, bound)
            del bound[table]

    for binding in extend(0, {}):
        yield {
            ColumnRef(t, c.name): binding[t][i]
            for t in spec.tables
            for i, c in enumerate(registry.table(t).columns)
        }


def _touches(predicate: Any, table: str) -> bool:
    if isinstance(predicate, JoinPredicate):
        return table in (predicate.left.table, predicate.right.table)
    return isinstance(predicate, FilterPredicate) and predicate.column.table == table


def aggregate_values(call: AggregateCall, values: Sequence[Any]) -> Any:
    """Fold one group's argument values; COUNT(*) receives one entry per row."""
    if call.argument is None:
        return len(values)
    values = [v for v in values if v is not None]
    if call.function == "COUNT":
        return len(values)
    if not values:
        return None
    if call.function == "SUM":
        total = sum(values)
        if isinstance(total, int) and not INT64_MIN <= total <= INT64_MAX:
            raise ArithmeticOverflow(str(call))
        return total
    if call.function == "AVG":
        return sum(values) / len(values)
    if call.function == "MIN":
        return min(values)
    return max(values)


def evaluate_select(
    spec: SelectSpec, registry: TableRegistry, db: Database
) -> Tuple[Tuple[str, ...], List[Row]]:
    """Column labels and result rows under bag semantics."""
    spec = resolve_select(spec, registry)
    for table in spec.tables:
        if table not in db:
            raise MissingTable(table)
    rows = list(_bindings(spec, registry, db))

    if spec.star:
        labels = tuple(label for t in spec.tables for label in registry.columns(t))
        return labels, [tuple(r.values()) for r in rows]

    labels = tuple(str(p) for p in spec.projections)
    if not spec.group_by and not spec.aggregates:
        return labels, [tuple(r[p] for p in spec.projections) for r in rows]  # type: ignore[index]

    groups: Dict[Tuple[Any, ...], List[Dict[ColumnRef, Any]]] = {}
    for r in rows:
        groups.setdefault(tuple(r[g] for g in spec.group_by), []).append(r)
    if not spec.group_by and not groups:
        groups[()] = []

    out: List[Row] = []
    for key, members in groups.items():
        keyed = dict(zip(spec.group_by, key))
        out.append(
            tuple(
                aggregate_values(p, [r.get(p.argument) for r in members])  # type: ignore[arg-type]
                if isinstance(p, AggregateCall)
                else keyed[p]
                for p in spec.projections
            )
        )
    return labels, out
