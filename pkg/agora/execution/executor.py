"""
Plan execution with usage metering
"""

from dataclasses import dataclass
from typing import Any, List, Mapping, Sequence, Tuple

import structlog

from agora.models.usage import UsageEvent, UsageMetric
from agora.query.logical import OpKind
from agora.query.reference import Row
from agora.query.registry import TableRegistry

from .engine import Engine, Relation
from .variants import ExecutionPlan

logger = structlog.get_logger(__name__)


def transfer_asset(source: Any, destination: Any) -> str:
    return f"transfer.{source.value}-{destination.value}"


@dataclass(frozen=True)
class ExecutionResult:
    labels: Tuple[str, ...]
    rows: List[Row]
    events: List[UsageEvent]

    def aligned(self, labels: Sequence[str]) -> List[Row]:
        return Relation(self.labels, self.rows).aligned(labels)


def execute_plan(
    plan: ExecutionPlan,
    db: Mapping[str, Sequence[Row]],
    registry: TableRegistry,
    run_id: str = "run",
    at: int = 0,
) -> ExecutionResult:
    """Evaluate a bound site plan bottom-up.

    Emits one Rows event per operator, billed to its variant and reported by
    its node, and one Bytes event per SHIP reported by the sending node.
    """
    if plan.plan is None:
        raise ValueError("execution plan carries no site plan")
    bindings = list(plan.bindings)
    events: List[UsageEvent] = []
    position = 0
    producer: dict = {}

    def record(node: Any, rows_in: int, out: Relation) -> None:
        nonlocal position
        if node.kind == OpKind.SHIP:
            sender = producer[id(node.child)]
            events.append(
                UsageEvent(
                    asset=transfer_asset(node.source_region, node.region),
                    metric=UsageMetric.BYTES,
                    amount=len(out.rows) * node.row_bytes,
                    at=at,
                    node=sender,
                    event_id=f"{run_id}:ship{len(events) + 1}:bytes",
                )
            )
            producer[id(node)] = sender
            return
        binding = bindings[position]
        position += 1
        producer[id(node)] = binding.node.node_id
        events.append(
            UsageEvent(
                asset=binding.variant.asset,
                metric=UsageMetric.ROWS,
                amount=rows_in,
                at=at,
                node=binding.node.node_id,
                event_id=f"{run_id}:{binding.slot.op_id}:rows",
            )
        )

    relation = Engine(registry, db, on_operator=record).evaluate(plan.plan)
    logger.info(
        "plan_executed",
        run_id=run_id,
        rows=len(relation.rows),
        events=len(events),
    )
    return ExecutionResult(relation.labels, relation.rows, events)
