"""Extended-SQL frontend: parsing, table registry and lowering."""

from .ast import (
    AggregateCall,
    ColumnRef,
    FilterPredicate,
    JoinPredicate,
    PolicyStatement,
    Query,
    RegisterTable,
    SelectSpec,
)
from .logical import (
    Aggregate,
    Filter,
    Join,
    LogicalPlan,
    OpKind,
    Project,
    Scan,
    to_logical_plan,
)
from .parser import parse_program
from .reference import evaluate_select
from .registry import Program, TableRegistry, compile_program

__all__ = [
    "Aggregate",
    "AggregateCall",
    "ColumnRef",
    "Filter",
    "FilterPredicate",
    "Join",
    "JoinPredicate",
    "LogicalPlan",
    "OpKind",
    "PolicyStatement",
    "Program",
    "Project",
    "Query",
    "RegisterTable",
    "Scan",
    "SelectSpec",
    "TableRegistry",
    "compile_program",
    "evaluate_select",
    "parse_program",
    "to_logical_plan",
]
