"""
Compliant geo-distributed plan search

Dynamic programming over table subsets (bushy join orders) crossed with the
region each join runs in. For a subset S and region r the memo keeps two
entries: the cheapest compliant plan whose top operator executes at r, and
the cheapest compliant plan whose output is available at r (executed there
or shipped there with one SHIP). Compliance of a SHIP depends only on the
region it leaves and the lineage of the shipped subset, so pruning
violating ships per memo entry is exact.
"""

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import structlog

from agora.errors import EnumerationLimitExceeded, NoCompliantPlan
from agora.models.regions import REGION_ORDER, Region
from agora.query.ast import FilterPredicate, JoinPredicate, SelectSpec
from agora.query.logical import Aggregate, Filter, Join, LogicalNode, Project, Scan, to_logical_plan
from agora.query.registry import TableRegistry

from .builder import SitePlanBuilder
from .cost import CostModel, estimate_cost
from .lineage import Policy, ship_violations
from .siteplan import SiteNode, serialize, ships

logger = structlog.get_logger(__name__)

MAX_TABLES = 12


@dataclass(frozen=True)
class QueryBlock:
    """A lowered query taken apart into the pieces the search recombines"""

    tables: Tuple[str, ...]
    filters: Mapping[str, Tuple[FilterPredicate, ...]]
    joins: Tuple[JoinPredicate, ...]
    aggregate: Optional[Aggregate] = None
    project: Optional[Project] = None


def decompose(lp: LogicalNode) -> QueryBlock:
    project = aggregate = None
    node = lp
    if isinstance(node, Project):
        project, node = node, node.child
    if isinstance(node, Aggregate):
        aggregate, node = node, node.child

    tables: List[str] = []
    filters: Dict[str, Tuple[FilterPredicate, ...]] = {}
    joins: List[JoinPredicate] = []

    def gather(n: LogicalNode) -> None:
        if isinstance(n, Join):
            gather(n.left)
            gather(n.right)
            joins.extend(n.predicates)
            return
        chain: List[FilterPredicate] = []
        while isinstance(n, Filter):
            chain.append(n.predicate)
            n = n.child
        if not isinstance(n, Scan):
            raise ValueError(f"unexpected {n.kind.value} below the join tree")
        tables.append(n.table)
        filters[n.table] = tuple(reversed(chain))

    gather(node)
    return QueryBlock(tuple(tables), filters, tuple(joins), aggregate, project)


@dataclass(frozen=True)
class Candidate:
    node: SiteNode
    cost: float
    ships: int

    @cached_property
    def serialized(self) -> str:
        return serialize(self.node)


def better(a: Candidate, b: Candidate) -> bool:
    """Lower cost, then fewer ships, then canonical serialization order."""
    if not math.isclose(a.cost, b.cost, rel_tol=1e-9, abs_tol=1e-9):
        return a.cost < b.cost
    if a.ships != b.ships:
        return a.ships < b.ships
    return a.serialized < b.serialized


@dataclass(frozen=True)
class OptimizedPlan:
    plan: SiteNode
    cost: float

    @property
    def ship_count(self) -> int:
        return len(ships(self.plan))


class Optimizer:
    def __init__(
        self,
        registry: TableRegistry,
        policies: Iterable[Policy] = (),
        cost_model: Optional[CostModel] = None,
    ):
        self.registry = registry
        self.policies = list(policies)
        self.cost_model = cost_model or CostModel()
        self.builder = SitePlanBuilder(registry, self.cost_model.filter_selectivity_default)

    def cpu(self, rows: float) -> float:
        return rows * self.cost_model.cpu_cost_per_row

    def base(self, table: str, predicates: Sequence[FilterPredicate]) -> Candidate:
        node = self.builder.scan(table)
        cost = self.cpu(node.rows)
        for predicate in predicates:
            cost += self.cpu(node.rows)
            node = self.builder.filter(predicate, node)
        return Candidate(node, cost, 0)

    def deliver(self, candidate: Candidate, region: Region) -> Optional[Candidate]:
        """The candidate's output at `region`, or None if the SHIP is not compliant."""
        node = candidate.node
        if node.region == region:
            return candidate
        if ship_violations(node.region, region, node.lineage, self.policies):
            return None
        rate = self.cost_model.ship_rate(node.region, region)
        return Candidate(
            self.builder.ship(node, region),
            candidate.cost + node.rows * node.row_bytes * rate,
            candidate.ships + 1,
        )

    def join(
        self, predicates: Sequence[JoinPredicate], left: Candidate, right: Candidate, region: Region
    ) -> Candidate:
        node = self.builder.join(predicates, left.node, right.node, region)
        cost = left.cost + right.cost + self.cpu(left.node.rows + right.node.rows)
        return Candidate(node, cost, left.ships + right.ships)

    @staticmethod
    def keep(memo: Dict, key: Tuple[int, Region], candidate: Optional[Candidate]) -> None:
        if candidate is None:
            return
        current = memo.get(key)
        if current is None or better(candidate, current):
            memo[key] = candidate

    def search(self, block: QueryBlock, target: Optional[Region]) -> Optional[Candidate]:
        tables = block.tables
        homes = {self.registry.region(t) for t in tables}
        if target is not None:
            homes.add(target)
        regions = sorted(homes, key=REGION_ORDER.__getitem__)
        bit = {t: 1 << i for i, t in enumerate(tables)}
        edges = [(bit[p.left.table or ""], bit[p.right.table or ""], p) for p in block.joins]

        executed: Dict[Tuple[int, Region], Candidate] = {}
        available: Dict[Tuple[int, Region], Candidate] = {}

        def fill_available(mask: int) -> None:
            for r in regions:
                for a in regions:
                    source = executed.get((mask, a))
                    if source is not None:
                        self.keep(available, (mask, r), self.deliver(source, r))

        for table in tables:
            candidate = self.base(table, block.filters.get(table, ()))
            executed[(bit[table], candidate.node.region)] = candidate
            fill_available(bit[table])

        full = (1 << len(tables)) - 1
        for mask in sorted(range(1, full + 1), key=lambda m: (bin(m).count("1"), m)):
            if mask & (mask - 1) == 0:
                continue
            low = mask & -mask
            sub = (mask - 1) & mask
            while sub:
                rest = mask ^ sub
                if sub & low:
                    crossing = tuple(
                        p
                        for lb, rb, p in edges
                        if (lb & sub and rb & rest) or (rb & sub and lb & rest)
                    )
                    if crossing:
                        for r in regions:
                            left, right = available.get((sub, r)), available.get((rest, r))
                            if left is None or right is None:
                                continue
                            self.keep(executed, (mask, r), self.join(crossing, left, right, r))
                sub = (sub - 1) & mask
            fill_available(mask)

        best: Optional[Candidate] = None
        for a in regions:
            top = (available if block.aggregate else executed).get((full, a))
            if top is None:
                continue
            final = self.deliver(self.finish(block, top, a), target or a)
            if final is not None and (best is None or better(final, best)):
                best = final
        return best

    def finish(self, block: QueryBlock, top: Candidate, region: Region) -> Candidate:
        """Aggregate at `region` (top is already there) and project in place."""
        node, cost = top.node, top.cost
        if block.aggregate is not None:
            cost += self.cpu(node.rows)
            node = self.builder.aggregate(
                block.aggregate.group_by, block.aggregate.aggregates, node, region
            )
        if block.project is not None:
            cost += self.cpu(node.rows)
            node = self.builder.project(block.project.items, node)
        return Candidate(node, cost, top.ships)


def optimize(
    lp: LogicalNode,
    registry: TableRegistry,
    policies: Iterable[Policy] = (),
    cost_model: Optional[CostModel] = None,
    target: Optional[Region] = None,
) -> OptimizedPlan:
    """Minimum-cost compliant site plan for a lowered query.

    Raises NoCompliantPlan when every plan in the search space ships data in
    violation of some policy, and EnumerationLimitExceeded above MAX_TABLES.
    """
    block = decompose(lp)
    if len(block.tables) > MAX_TABLES:
        raise EnumerationLimitExceeded(len(block.tables), MAX_TABLES)
    optimizer = Optimizer(registry, policies, cost_model)
    best = optimizer.search(block, target)
    if best is None:
        logger.info(
            "no_compliant_plan", tables=list(block.tables), policies=len(optimizer.policies)
        )
        raise NoCompliantPlan()
    cost = estimate_cost(best.node, optimizer.cost_model, registry)
    logger.debug(
        "plan_optimized",
        tables=list(block.tables),
        ships=best.ships,
        cost=round(cost, 6),
    )
    return OptimizedPlan(best.node, cost)


def plan_query(
    spec: SelectSpec,
    registry: TableRegistry,
    policies: Iterable[Policy] = (),
    cost_model: Optional[CostModel] = None,
) -> OptimizedPlan:
    """Lower and optimize a SELECT, delivering to its AT region if it names one."""
    lp = to_logical_plan(spec, registry)
    return optimize(lp, registry, policies, cost_model, spec.target_region)
