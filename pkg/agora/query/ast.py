"""
Extended-SQL syntax tree
"""

import operator
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Tuple, Union

from agora.models.assets import ColumnType
from agora.models.constraints import AggregatedOnly, DenyShip
from agora.models.regions import Region

Literal = Union[int, float, str, bool]

COMPARATORS: Dict[str, Callable[[Any, Any], bool]] = {
    "=": operator.eq,
    "!=": operator.ne,
    "<>": operator.ne,
    "<": operator.lt,
    "<=": operator.le,
    ">": operator.gt,
    ">=": operator.ge,
}

AGGREGATE_FUNCTIONS = ("COUNT", "SUM", "AVG", "MIN", "MAX")


@dataclass(frozen=True)
class ColumnRef:
    table: Optional[str]
    column: str

    def __str__(self) -> str:
        return f"{self.table}.{self.column}" if self.table else self.column


@dataclass(frozen=True)
class AggregateCall:
    function: str
    argument: Optional[ColumnRef]  # None means COUNT(*)

    def __str__(self) -> str:
        return f"{self.function}({self.argument if self.argument else '*'})"


SelectItem = Union[ColumnRef, AggregateCall]


@dataclass(frozen=True)
class JoinPredicate:
    left: ColumnRef
    right: ColumnRef

    def __str__(self) -> str:
        return f"{self.left} = {self.right}"


def render_literal(value: Literal) -> str:
    if isinstance(value, bool):
        return "TRUE" if value else "FALSE"
    if isinstance(value, str):
        return "'" + value.replace("'", "''") + "'"
    return repr(value)


@dataclass(frozen=True)
class FilterPredicate:
    column: ColumnRef
    op: str
    value: Literal

    def __str__(self) -> str:
        return f"{self.column} {self.op} {render_literal(self.value)}"

    def holds(self, observed: Any) -> bool:
        if observed is None:
            return False
        return COMPARATORS[self.op](observed, self.value)


Predicate = Union[JoinPredicate, FilterPredicate]


@dataclass(frozen=True)
class ColumnDef:
    name: str
    type: ColumnType
    distinct: Optional[int] = None


@dataclass(frozen=True)
class RegisterTable:
    name: str
    region: Region
    row_count: int
    row_bytes: int
    columns: Tuple[ColumnDef, ...]

    @property
    def distinct_counts(self) -> Dict[str, int]:
        return {c.name: c.distinct for c in self.columns if c.distinct is not None}


@dataclass(frozen=True)
class PolicyStatement:
    policy: Union[DenyShip, AggregatedOnly]


@dataclass(frozen=True)
class SelectSpec:
    projections: Tuple[SelectItem, ...]
    tables: Tuple[str, ...]
    predicates: Tuple[Predicate, ...] = ()
    group_by: Tuple[ColumnRef, ...] = ()
    target_region: Optional[Region] = None

    @property
    def star(self) -> bool:
        return not self.projections

    @property
    def aggregates(self) -> Tuple[AggregateCall, ...]:
        return tuple(p for p in self.projections if isinstance(p, AggregateCall))


@dataclass(frozen=True)
class Query:
    select: SelectSpec


Statement = Union[RegisterTable, PolicyStatement, Query]
