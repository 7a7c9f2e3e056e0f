"""
Pipeline composition
Wires validated descriptors into a DAG, checking edge types and the usage
constraints every participating asset carries.
"""

from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import networkx as nx
import structlog

from agora.errors import (
    ConstraintViolation,
    CycleDetected,
    InvalidDescriptor,
    TypeMismatch,
    UnboundInput,
)
from agora.models.assets import (
    AssetDescriptor,
    AssetKind,
    PipelineEdge,
    PipelineGraph,
    PipelineNode,
    describe_type,
)
from agora.models.constraints import NoCrossProviderAggregation, NoOverlay, VendorDeny

from .signature import same_type

logger = structlog.get_logger(__name__)

EdgeSpec = Union[PipelineEdge, Tuple[int, int, int, int]]

COMBINING_ROLES = frozenset({"join"})
AGGREGATING_ROLES = frozenset({"aggregation"})


def to_digraph(graph: PipelineGraph) -> nx.DiGraph:
    dag = nx.DiGraph()
    dag.add_nodes_from(n.node_id for n in graph.nodes)
    dag.add_edges_from((e.from_node, e.to_node) for e in graph.edges)
    return dag


def check_pipeline_graph(
    graph: PipelineGraph, descriptors: Mapping[str, AssetDescriptor]
) -> None:
    """Raise on the first structural or typing problem.

    `descriptors` maps node ids to the asset each node runs; when a node is
    missing from it only the structural checks apply to that node.
    """
    ids = [n.node_id for n in graph.nodes]
    if len(set(ids)) != len(ids):
        duplicate = next(i for i in ids if ids.count(i) > 1)
        raise UnboundInput(duplicate, -1, "duplicate node id")
    known = set(ids)
    for edge in graph.edges:
        for end in (edge.from_node, edge.to_node):
            if end not in known:
                raise UnboundInput(end, edge.to_input_index, f"edge {edge} names an unknown node")

    dag = to_digraph(graph)
    if not nx.is_directed_acyclic_graph(dag):
        cycle = nx.find_cycle(dag)
        raise CycleDetected(u for u, _ in cycle)

    bound: Dict[Tuple[str, int], PipelineEdge] = {}
    for edge in graph.edges:
        slot = (edge.to_node, edge.to_input_index)
        if slot in bound:
            raise UnboundInput(edge.to_node, edge.to_input_index, "input bound twice")
        bound[slot] = edge

        source = descriptors.get(edge.from_node)
        target = descriptors.get(edge.to_node)
        if source is None or target is None:
            continue
        if edge.from_output_index != 0:
            raise TypeMismatch(edge, "output index 0", f"output index {edge.from_output_index}")
        inputs = target.signature.input_types
        if not 0 <= edge.to_input_index < len(inputs):
            raise TypeMismatch(edge, f"{len(inputs)} inputs", f"input index {edge.to_input_index}")
        expected = inputs[edge.to_input_index]
        actual = source.signature.output_type
        if not same_type(expected, actual):
            raise TypeMismatch(edge, describe_type(expected), describe_type(actual))

    for node_id in ids:
        descriptor = descriptors.get(node_id)
        if descriptor is None or dag.in_degree(node_id) == 0:
            continue
        for index in range(len(descriptor.signature.input_types)):
            if (node_id, index) not in bound:
                raise UnboundInput(node_id, index)


def check_usage_constraints(
    graph: PipelineGraph,
    descriptors: Mapping[str, AssetDescriptor],
    consumer: Optional[str] = None,
) -> None:
    dag = to_digraph(graph)
    roles = {n.node_id: n.role_category for n in graph.nodes}
    for node in graph.nodes:
        asset = descriptors.get(node.node_id)
        if asset is None:
            continue
        downstream = nx.descendants(dag, node.node_id)
        for constraint in asset.usage_constraints:
            if isinstance(constraint, VendorDeny):
                if consumer is not None and consumer in constraint.consumers:
                    raise ConstraintViolation(asset.id, f"vendor-deny:{consumer}")
            elif isinstance(constraint, NoOverlay):
                for other in downstream:
                    if roles[other] in COMBINING_ROLES:
                        raise ConstraintViolation(asset.id, "no-overlay")
                    mixed = [
                        a
                        for a in nx.ancestors(dag, other)
                        if a != node.node_id
                        and a in descriptors
                        and descriptors[a].kind == AssetKind.DATA_SOURCE
                    ]
                    if mixed:
                        raise ConstraintViolation(asset.id, "no-overlay")
            elif isinstance(constraint, NoCrossProviderAggregation):
                for other in downstream:
                    if roles[other] not in AGGREGATING_ROLES:
                        continue
                    providers = {
                        descriptors[a].provider
                        for a in nx.ancestors(dag, other) | {other}
                        if a in descriptors
                    }
                    if providers - {asset.provider}:
                        raise ConstraintViolation(asset.id, "no-cross-provider-aggregation")


def _as_edge(spec: EdgeSpec) -> PipelineEdge:
    if isinstance(spec, PipelineEdge):
        return spec
    from_index, output_index, to_index, input_index = spec
    return PipelineEdge(
        from_node=f"n{from_index}",
        from_output_index=output_index,
        to_node=f"n{to_index}",
        to_input_index=input_index,
    )


def compose_pipeline(
    nodes: Sequence[AssetDescriptor],
    edges: Sequence[EdgeSpec],
    consumer: Optional[str] = None,
) -> PipelineGraph:
    """Compose descriptors into a pipeline graph.

    Node i gets id "n<i>"; edges are PipelineEdge values or
    (from_index, output_index, to_index, input_index) tuples.
    """
    # local import: validation reuses check_pipeline_graph from this module
    from .validation import validate_descriptor

    for descriptor in nodes:
        report = validate_descriptor(descriptor)
        if not report.ok:
            raise InvalidDescriptor(descriptor.id, report.violations)

    graph_nodes: List[PipelineNode] = [
        PipelineNode(node_id=f"n{i}", asset_ref=d.id, role_category=d.signature.goal)
        for i, d in enumerate(nodes)
    ]
    graph = PipelineGraph(nodes=tuple(graph_nodes), edges=tuple(_as_edge(e) for e in edges))
    by_node = {n.node_id: d for n, d in zip(graph_nodes, nodes)}

    check_pipeline_graph(graph, by_node)
    check_usage_constraints(graph, by_node, consumer)

    logger.debug("pipeline_composed", nodes=len(graph.nodes), edges=len(graph.edges))
    return graph
