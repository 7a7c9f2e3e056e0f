"""
Implementation variants and their placement

Every operator of a plan is bound to one (variant, node) pair from the
variant class of its logical signature. The chosen assignment minimizes
estimated runtime, then estimated price, then the canonical order of
(variant asset, node id) pairs, subject to the budget and certificate
feasibility.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple, Union

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from agora.assets.codec import read_documents
from agora.assets.signature import canonical_signature
from agora.errors import BudgetInfeasible, NoEligibleNode
from agora.models.assets import CertificateRequirement, LogicalSignature
from agora.models.money import Money
from agora.models.pricing import PayPerUse, PricingModel, UsageUnit, estimate_charge
from agora.planner.explain import OPERATOR_GOALS, OperatorSlot, plan_operators, relational_signature
from agora.planner.siteplan import SiteNode

from .certificates import AuthorityRegistry, verify_certificates
from .nodes import NodeExecutorInfo

logger = structlog.get_logger(__name__)

RELATIONAL_CAPABILITY = "relational"


class ImplementationVariant(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    asset: str = Field(min_length=1)
    implements: LogicalSignature
    runtime_factor: float = Field(gt=0)
    price: PricingModel
    required_certificates: Tuple[CertificateRequirement, ...] = ()
    required_capability: Optional[str] = None

    @field_validator("runtime_factor")
    @classmethod
    def _finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("runtime_factor must be finite")
        return value

    @property
    def signature_key(self) -> bytes:
        return canonical_signature(self.implements)


def builtin_variants() -> List[ImplementationVariant]:
    """One free relational variant per operator kind, runnable on relational nodes."""
    return [
        ImplementationVariant(
            asset=f"builtin.{goal}",
            implements=relational_signature(kind),
            runtime_factor=1.0,
            price=PayPerUse(rate=Money.zero(), metric=UsageUnit.PER_CALL),
            required_capability=RELATIONAL_CAPABILITY,
        )
        for kind, goal in OPERATOR_GOALS.items()
    ]


def variant_classes(
    variants: Iterable[ImplementationVariant],
) -> Dict[bytes, List[ImplementationVariant]]:
    """Variants grouped by canonical signature, each class sorted by asset id."""
    classes: Dict[bytes, List[ImplementationVariant]] = {}
    for variant in variants:
        classes.setdefault(variant.signature_key, []).append(variant)
    return {key: sorted(members, key=lambda v: v.asset) for key, members in classes.items()}


@dataclass(frozen=True)
class Binding:
    slot: OperatorSlot
    variant: ImplementationVariant
    node: NodeExecutorInfo
    runtime: float
    price: Money

    @property
    def key(self) -> Tuple[str, str]:
        return (self.variant.asset, self.node.node_id)


@dataclass(frozen=True)
class ExecutionPlan:
    bindings: Tuple[Binding, ...]
    estimated_runtime: float
    estimated_price: Money
    plan: Optional[SiteNode] = None

    def binding_for(self, op_id: str) -> Binding:
        return next(b for b in self.bindings if b.slot.op_id == op_id)

    def describe(self) -> List[str]:
        return [
            f"{b.slot.op_id} {b.slot.label or b.slot.signature.goal} -> "
            f"{b.variant.asset}@{b.node.node_id} runtime={b.runtime:.4f} price={b.price}"
            for b in self.bindings
        ]


def slot_bytes(slot: OperatorSlot) -> int:
    return math.ceil(slot.rows * slot.row_bytes)


def option_price(
    slot: OperatorSlot, variant: ImplementationVariant, node: NodeExecutorInfo, runtime: float
) -> Money:
    nbytes = slot_bytes(slot)
    seconds = Fraction(runtime)
    return estimate_charge(variant.price, nbytes=nbytes, seconds=seconds) + estimate_charge(
        node.price, nbytes=nbytes, seconds=seconds
    )


def eligible(
    slot: OperatorSlot,
    variant: ImplementationVariant,
    node: NodeExecutorInfo,
    registry: AuthorityRegistry,
    now: int,
) -> bool:
    if slot.region is not None and node.region != slot.region:
        return False
    if not node.has_capability(variant.required_capability):
        return False
    return verify_certificates(node, variant.required_certificates, now, registry)


def slot_options(
    slot: OperatorSlot,
    classes: Mapping[bytes, Sequence[ImplementationVariant]],
    nodes: Sequence[NodeExecutorInfo],
    registry: AuthorityRegistry,
    now: int,
) -> List[Binding]:
    """Every certificate-feasible binding for one operator, unpruned."""
    candidates = classes.get(canonical_signature(slot.signature), ())
    if not candidates:
        raise NoEligibleNode(slot.op_id, f"no variant implements {slot.signature.goal}")
    options: List[Binding] = []
    for variant in candidates:
        for node in sorted(nodes, key=lambda n: n.node_id):
            if not eligible(slot, variant, node, registry, now):
                continue
            runtime = slot.rows * variant.runtime_factor / node.speed_factor
            options.append(
                Binding(slot, variant, node, runtime, option_price(slot, variant, node, runtime))
            )
    if not options:
        where = f" in {slot.region.value}" if slot.region is not None else ""
        raise NoEligibleNode(slot.op_id, f"no certified node{where} for any variant")
    return options


def _rank(b: Binding) -> Tuple[float, int, Tuple[str, str]]:
    return (b.runtime, b.price.micro_units, b.key)


def pareto(options: Sequence[Binding]) -> List[Binding]:
    """Drop options another option beats on both runtime and price."""
    kept: List[Binding] = []
    for option in sorted(options, key=_rank):
        if any(k.runtime <= option.runtime and k.price <= option.price for k in kept):
            continue
        kept.append(option)
    return kept


def select_variants(
    plan: Union[SiteNode, Sequence[OperatorSlot]],
    classes: Mapping[bytes, Sequence[ImplementationVariant]],
    nodes: Sequence[NodeExecutorInfo],
    budget: Optional[Money] = None,
    *,
    registry: Optional[AuthorityRegistry] = None,
    now: int = 0,
) -> ExecutionPlan:
    """Fastest feasible assignment within budget.

    Raises NoEligibleNode when an operator has no feasible binding and
    BudgetInfeasible (carrying the cheapest achievable price) when even the
    cheapest assignment exceeds the budget.
    """
    site_plan = plan if isinstance(plan, SiteNode) else None
    slots = plan_operators(plan) if isinstance(plan, SiteNode) else list(plan)
    registry = registry or AuthorityRegistry()
    per_slot = [pareto(slot_options(s, classes, nodes, registry, now)) for s in slots]

    cheapest = [min(o.price.micro_units for o in options) for options in per_slot]
    min_price = Money.micro(sum(cheapest))
    if budget is not None and min_price > budget:
        raise BudgetInfeasible(min_price, budget)

    fastest = [min(o.runtime for o in options) for options in per_slot]
    # suffix sums give admissible bounds for the remaining operators
    runtime_bound = [0.0] * (len(slots) + 1)
    price_bound = [0] * (len(slots) + 1)
    for i in range(len(slots) - 1, -1, -1):
        runtime_bound[i] = runtime_bound[i + 1] + fastest[i]
        price_bound[i] = price_bound[i + 1] + cheapest[i]
    limit = budget.micro_units if budget is not None else None

    best: Optional[Tuple[float, int, Tuple[Tuple[str, str], ...]]] = None
    best_choice: List[Binding] = []
    chosen: List[Binding] = []

    def search(i: int, runtime: float, price: int) -> None:
        nonlocal best, best_choice
        if limit is not None and price + price_bound[i] > limit:
            return
        if best is not None and runtime + runtime_bound[i] > best[0] * (1 + 1e-9) + 1e-12:
            return
        if i == len(slots):
            rank = (runtime, price, tuple(b.key for b in chosen))
            if best is None or rank < best:
                best, best_choice = rank, list(chosen)
            return
        for option in per_slot[i]:
            chosen.append(option)
            search(i + 1, runtime + option.runtime, price + option.price.micro_units)
            chosen.pop()

    search(0, 0.0, 0)
    assert best is not None
    logger.debug(
        "variants_selected",
        operators=len(slots),
        runtime=round(best[0], 6),
        price=best[1],
    )
    return ExecutionPlan(
        bindings=tuple(best_choice),
        estimated_runtime=best[0],
        estimated_price=Money.micro(best[1]),
        plan=site_plan,
    )


def load_variants(path: str) -> List[ImplementationVariant]:
    """Newline-delimited ImplementationVariant documents."""
    return read_documents(path, ImplementationVariant)
