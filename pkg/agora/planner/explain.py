"""
Plan text and the operator list handed to variant selection
"""

from dataclasses import dataclass
from typing import List, Optional

from agora.models.assets import LogicalSignature
from agora.models.regions import Region
from agora.query.logical import OpKind

from .siteplan import SiteNode, node_label, walk

INDENT = "  "
NC_VERDICT = "compliant=NC-impossible"

RELATION = "relation"
OPERATOR_GOALS = {
    OpKind.SCAN: "scan",
    OpKind.FILTER: "filter",
    OpKind.JOIN: "join",
    OpKind.AGGREGATE: "aggregation",
    OpKind.PROJECT: "projection",
}


def render_plan(plan: SiteNode, cost: Optional[float] = None, explain: bool = False) -> str:
    """Indented tree, one node per line, then the cost/verdict line."""
    lines: List[str] = []

    def emit(node: SiteNode, depth: int) -> None:
        line = INDENT * depth + node_label(node)
        if explain:
            line += f" [rows={node.rows:.1f} bytes={node.output_bytes:.1f}]"
        lines.append(line)
        for child in node.children:
            emit(child, depth + 1)

    emit(plan, 0)
    if cost is not None:
        lines.append(f"cost={cost:.4f} compliant=C")
    return "\n".join(lines) + "\n"


def relational_signature(kind: OpKind) -> LogicalSignature:
    arity = {OpKind.SCAN: 0, OpKind.JOIN: 2}.get(kind, 1)
    return LogicalSignature(
        goal=OPERATOR_GOALS[kind], input_types=(RELATION,) * arity, output_type=RELATION
    )


@dataclass(frozen=True)
class OperatorSlot:
    """One operator awaiting an (implementation variant, node) binding"""

    op_id: str
    signature: LogicalSignature
    rows: float  # input rows the operator processes
    region: Optional[Region] = None  # None: any region
    row_bytes: int = 0
    label: str = ""
    table: Optional[str] = None


def plan_operators(plan: SiteNode) -> List[OperatorSlot]:
    """Non-SHIP operators in post-order with their input volume."""
    slots: List[OperatorSlot] = []
    for node in walk(plan):
        if node.kind == OpKind.SHIP:
            continue
        rows = node.rows if node.kind == OpKind.SCAN else sum(c.rows for c in node.children)
        slots.append(
            OperatorSlot(
                op_id=f"op{len(slots) + 1}",
                signature=relational_signature(node.kind),
                region=node.region,
                rows=rows,
                row_bytes=node.row_bytes,
                label=node_label(node),
                table=node.table,
            )
        )
    return slots
