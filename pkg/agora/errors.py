"""
Domain errors
Every error raised by the kernel derives from AgoraError and carries the
structured fields callers need; the CLI maps them to exit codes.
"""

from typing import Any, FrozenSet, Iterable, Optional, Sequence, Tuple


class AgoraError(Exception):
    """Root of all domain errors"""

    exit_code = 1


class UsageError(AgoraError):
    """Malformed input that the user has to fix (exit code 2)"""

    exit_code = 2


# -- configuration ----------------------------------------------------------


class ConfigError(UsageError):
    def __init__(self, field: str, reason: str):
        self.field = field
        self.reason = reason
        super().__init__(f"invalid config field {field!r}: {reason}")


# -- asset model -----------------------------------------------------------


class DocumentSyntaxError(UsageError):
    """Descriptor document is not well-formed JSON"""

    def __init__(self, position: int, message: str = "malformed document"):
        self.position = position
        super().__init__(f"{message} at position {position}")


class SchemaError(UsageError):
    """Descriptor document does not match the descriptor schema"""

    def __init__(self, field: str, message: str = "schema violation"):
        self.field = field
        super().__init__(f"{field}: {message}")


class InvalidDescriptor(AgoraError):
    def __init__(self, asset_id: str, violations: Sequence[Any]):
        self.asset_id = asset_id
        self.violations = tuple(violations)
        rules = "; ".join(f"{v.field}: {v.rule}" for v in self.violations)
        super().__init__(f"descriptor {asset_id!r} is invalid: {rules}")


class CompositionError(AgoraError):
    """Pipeline composition rejected"""


class CycleDetected(CompositionError):
    def __init__(self, nodes: Iterable[str]):
        self.nodes = tuple(nodes)
        super().__init__(f"pipeline graph has a cycle through {', '.join(self.nodes)}")


class TypeMismatch(CompositionError):
    def __init__(self, edge: Any, expected: str, actual: str):
        self.edge = edge
        self.expected = expected
        self.actual = actual
        super().__init__(f"edge {edge} feeds {actual} into an input expecting {expected}")


class UnboundInput(CompositionError):
    def __init__(self, node: str, index: int, reason: str = "input not bound"):
        self.node = node
        self.index = index
        super().__init__(f"node {node} input {index}: {reason}")


class ConstraintViolation(CompositionError):
    def __init__(self, asset: str, rule: str):
        self.asset = asset
        self.rule = rule
        super().__init__(f"asset {asset!r} forbids this composition ({rule})")


# -- catalog ----------------------------------------------------------------


class DuplicateId(AgoraError):
    def __init__(self, asset_id: str, market: str):
        self.asset_id = asset_id
        self.market = market
        super().__init__(f"asset {asset_id!r} already published in {market!r}")


class UnknownAsset(AgoraError):
    def __init__(self, asset_id: str):
        self.asset_id = asset_id
        super().__init__(f"unknown asset {asset_id!r}")


class IdCollisionAcrossMarkets(AgoraError):
    def __init__(self, asset_id: str, first: str, second: str):
        self.asset_id = asset_id
        self.provenance = (first, second)
        super().__init__(f"asset {asset_id!r} published in both {first!r} and {second!r}")


# -- query frontend ---------------------------------------------------------


class QuerySyntaxError(UsageError):
    def __init__(self, line: int, column: int, expected: Iterable[str], found: str):
        self.line = line
        self.column = column
        self.expected: FrozenSet[str] = frozenset(expected)
        self.found = found
        wanted = ", ".join(sorted(self.expected)) or "end of input"
        super().__init__(f"line {line}, column {column}: expected {wanted}, found {found!r}")


class InvalidQuery(AgoraError):
    """Query does not resolve against the registered tables"""

    exit_code = 2


class UnknownTable(InvalidQuery):
    def __init__(self, table: str):
        self.table = table
        super().__init__(f"unknown table {table!r}")


class UnknownColumn(InvalidQuery):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"unknown column {column!r}")


class AmbiguousColumn(InvalidQuery):
    def __init__(self, column: str, tables: Iterable[str]):
        self.column = column
        self.tables = tuple(tables)
        super().__init__(f"column {column!r} is ambiguous between {', '.join(self.tables)}")


class DisconnectedJoinGraph(InvalidQuery):
    def __init__(self, components: Sequence[Sequence[str]]):
        self.components = tuple(tuple(c) for c in components)
        parts = " | ".join(",".join(c) for c in self.components)
        super().__init__(f"join graph is not connected: {parts}")


class AggregateMisuse(InvalidQuery):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"column {column!r} must appear in GROUP BY or inside an aggregate")


class MissingStats(AgoraError):
    def __init__(self, table: str):
        self.table = table
        super().__init__(f"no statistics registered for table {table!r}")


# -- planner ------------------------------------------------------------------


class NoCompliantPlan(AgoraError):
    def __init__(self, reason: str = "every plan in the search space violates a policy"):
        self.reason = reason
        super().__init__(reason)


class EnumerationLimitExceeded(AgoraError):
    def __init__(self, tables: int, limit: int):
        self.tables = tables
        self.limit = limit
        super().__init__(f"{tables} tables exceed the enumeration bound of {limit}")


# -- execution --------------------------------------------------------------


class UnknownAuthority(AgoraError):
    def __init__(self, name: str):
        self.name = name
        super().__init__(f"authority {name!r} is not registered")


class BudgetInfeasible(AgoraError):
    def __init__(self, min_price: Any, budget: Any):
        self.min_price = min_price
        self.budget = budget
        super().__init__(f"cheapest assignment costs {min_price}, budget is {budget}")


class NoEligibleNode(AgoraError):
    def __init__(self, operator: str, reason: str):
        self.operator = operator
        self.reason = reason
        super().__init__(f"operator {operator}: {reason}")


class MissingTable(AgoraError):
    def __init__(self, table: str):
        self.table = table
        super().__init__(f"no data loaded for table {table!r}")


class ArithmeticOverflow(AgoraError):
    def __init__(self, column: str):
        self.column = column
        super().__init__(f"{column} overflows a signed 64-bit integer")


# -- metering ---------------------------------------------------------------


class LateEvent(AgoraError):
    def __init__(self, event_id: Optional[str], at: int, watermark: int):
        self.event_id = event_id
        self.at = at
        self.watermark = watermark
        super().__init__(f"event at {at} is older than the oldest open window ({watermark})")


class UntrustedNode(AgoraError):
    def __init__(self, node: str):
        self.node = node
        super().__init__(f"node {node!r} holds no valid usage-tracking certificate")


class MissingPricing(AgoraError):
    def __init__(self, asset: str):
        self.asset = asset
        super().__init__(f"no pricing entry for asset {asset!r}")


class InvalidShareTree(AgoraError):
    def __init__(self, problems: Sequence[str]):
        self.problems = tuple(problems)
        super().__init__("invalid revenue share tree: " + "; ".join(self.problems))


class InvalidTransition(AgoraError):
    def __init__(self, txn_id: str, current: str, requested: str):
        self.txn_id = txn_id
        self.transition: Tuple[str, str] = (current, requested)
        super().__init__(f"transaction {txn_id}: {current} -> {requested} is not allowed")


class BackendUnavailable(AgoraError):
    """Payment backend could not be reached"""


# -- escrow -----------------------------------------------------------------


class UnknownChunk(AgoraError):
    def __init__(self, chunk_index: int):
        self.chunk_index = chunk_index
        super().__init__(f"no manifest registered for chunk {chunk_index}")


class DecryptionFailed(AgoraError):
    def __init__(self, chunk_index: int):
        self.chunk_index = chunk_index
        super().__init__(f"chunk {chunk_index} failed authenticated decryption")
