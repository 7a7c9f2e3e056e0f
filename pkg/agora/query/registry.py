"""
Registered tables and their statistics
"""

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from agora.errors import AmbiguousColumn, MissingStats, UnknownColumn, UnknownTable
from agora.models.assets import ColumnType
from agora.models.constraints import AggregatedOnly, DenyShip
from agora.models.money import round_preserving_sum
from agora.models.regions import Region

from .ast import ColumnDef, ColumnRef, PolicyStatement, Query, RegisterTable, SelectSpec
from .parser import parse_program

# relative share of a row's bytes each column type takes
TYPE_WEIGHTS = {
    ColumnType.INT64: 8,
    ColumnType.FLOAT64: 8,
    ColumnType.TEXT: 24,
    ColumnType.BOOL: 1,
    ColumnType.DATE: 4,
}
AGGREGATE_WIDTH = 8


@dataclass(frozen=True)
class TableStats:
    table: RegisterTable
    widths: Dict[str, int]

    @classmethod
    def of(cls, table: RegisterTable) -> "TableStats":
        weights = [TYPE_WEIGHTS[c.type] for c in table.columns]
        total = sum(weights)
        widths = round_preserving_sum([Fraction(table.row_bytes * w, total) for w in weights])
        return cls(table, {c.name: w for c, w in zip(table.columns, widths)})

    def column(self, name: str) -> Optional[ColumnDef]:
        return next((c for c in self.table.columns if c.name == name), None)

    def distinct(self, name: str) -> int:
        column = self.column(name)
        if column is not None and column.distinct is not None:
            return column.distinct
        return max(1, self.table.row_count)


class TableRegistry:
    """Tables registered by a program, resolvable by name and column"""

    def __init__(self, tables: Iterable[RegisterTable] = ()):
        self._tables: Dict[str, TableStats] = {}
        for table in tables:
            self.register(table)

    def register(self, table: RegisterTable) -> None:
        self._tables[table.name] = TableStats.of(table)

    def __contains__(self, name: object) -> bool:
        return name in self._tables

    def __iter__(self) -> Iterator[str]:
        return iter(self._tables)

    def names(self) -> List[str]:
        return list(self._tables)

    def stats(self, name: str) -> TableStats:
        if name not in self._tables:
            raise MissingStats(name)
        return self._tables[name]

    def table(self, name: str) -> RegisterTable:
        if name not in self._tables:
            raise UnknownTable(name)
        return self._tables[name].table

    def region(self, name: str) -> Region:
        return self.table(name).region

    def columns(self, name: str) -> Tuple[str, ...]:
        return tuple(f"{name}.{c.name}" for c in self.table(name).columns)

    def resolve(self, ref: ColumnRef, tables: Sequence[str]) -> ColumnRef:
        """Qualify a column reference against the tables of one query."""
        if ref.table is not None:
            if ref.table not in tables:
                raise UnknownTable(ref.table)
            if self.stats(ref.table).column(ref.column) is None:
                raise UnknownColumn(str(ref))
            return ref
        owners = [t for t in tables if self.stats(t).column(ref.column) is not None]
        if not owners:
            raise UnknownColumn(ref.column)
        if len(owners) > 1:
            raise AmbiguousColumn(ref.column, owners)
        return ColumnRef(owners[0], ref.column)

    def column_def(self, ref: ColumnRef) -> ColumnDef:
        column = self.stats(ref.table or "").column(ref.column)
        if column is None:
            raise UnknownColumn(str(ref))
        return column

    def distinct(self, ref: ColumnRef) -> int:
        return self.stats(ref.table or "").distinct(ref.column)

    def width(self, ref: ColumnRef) -> int:
        return self.stats(ref.table or "").widths[ref.column]


@dataclass
class Program:
    """A parsed program: its tables, its policies and its queries"""

    registry: TableRegistry
    policies: List[Union[DenyShip, AggregatedOnly]] = field(default_factory=list)
    queries: List[SelectSpec] = field(default_factory=list)


def compile_program(text: str) -> Program:
    """Parse a program and split it; policies are scoped to this program."""
    program = Program(TableRegistry())
    for statement in parse_program(text):
        if isinstance(statement, RegisterTable):
            program.registry.register(statement)
        elif isinstance(statement, PolicyStatement):
            if statement.policy not in program.policies:
                program.policies.append(statement.policy)
        elif isinstance(statement, Query):
            program.queries.append(statement.select)
    return program
