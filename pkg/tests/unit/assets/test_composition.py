"""Unit tests for pipeline composition and logical signatures."""
import pytest

from agora.assets import compose_pipeline, logical_signature
from agora.errors import (
    ConstraintViolation,
    CycleDetected,
    InvalidDescriptor,
    TypeMismatch,
    UnboundInput,
)
from agora.models import (
    LogicalSignature,
    NoCrossProviderAggregation,
    NoOverlay,
    PipelineEdge,
    VendorDeny,
)
from tests.factories import DataSourceFactory, DescriptorFactory


def algorithm(goal="regression", inputs=("listings",), output="price-estimate", **kwargs):
    signature = LogicalSignature(goal=goal, input_types=tuple(inputs), output_type=output)
    return DescriptorFactory(signature=signature, **kwargs)


def source(output="listings", **kwargs):
    signature = LogicalSignature(goal="data-source", input_types=(), output_type=output)
    return DataSourceFactory(signature=signature, **kwargs)


class TestComposePipeline:
    """Tests for wiring descriptors into a typed DAG."""

    def test_source_feeds_algorithm(self):
        """Test a two-node pipeline with tuple edge shorthand."""
        graph = compose_pipeline([source(id="listings"), algorithm(id="net")], [(0, 0, 1, 0)])
        assert [n.node_id for n in graph.nodes] == ["n0", "n1"]
        assert [n.asset_ref for n in graph.nodes] == ["listings", "net"]
        assert graph.edges == (PipelineEdge(from_node="n0", to_node="n1"),)
        assert graph.node("n1").role_category == "regression"

    def test_type_mismatch(self):
        with pytest.raises(TypeMismatch) as excinfo:
            compose_pipeline([source(output="crimes"), algorithm()], [(0, 0, 1, 0)])
        assert excinfo.value.expected == "listings"
        assert excinfo.value.actual == "crimes"

    def test_unbound_input(self):
        """Test that a node with some bound inputs must have all of them bound."""
        join = algorithm(goal="join", inputs=("listings", "crimes"), output="listings")
        with pytest.raises(UnboundInput) as excinfo:
            compose_pipeline([source(), join], [(0, 0, 1, 0)])
        assert (excinfo.value.node, excinfo.value.index) == ("n1", 1)

    def test_input_bound_twice(self):
        with pytest.raises(UnboundInput, match="bound twice"):
            compose_pipeline([source(), source(), algorithm()], [(0, 0, 2, 0), (1, 0, 2, 0)])

    def test_cycle(self):
        loop = dict(goal="feature-engineering", inputs=("listings",), output="listings")
        with pytest.raises(CycleDetected) as excinfo:
            compose_pipeline([algorithm(**loop), algorithm(**loop)], [(0, 0, 1, 0), (1, 0, 0, 0)])
        assert set(excinfo.value.nodes) == {"n0", "n1"}

    def test_invalid_component(self):
        with pytest.raises(InvalidDescriptor):
            compose_pipeline([source(region=None), algorithm()], [(0, 0, 1, 0)])


class TestUsageConstraints:
    """Tests for constraints checked against the composed graph."""

    def test_no_overlay_forbids_joins(self):
        """Test that a no-overlay asset may not reach a combining operator."""
        join = algorithm(goal="join", inputs=("listings", "crimes"), output="listings")
        parts = [source(usage_constraints=(NoOverlay(),)), source(output="crimes"), join]
        with pytest.raises(ConstraintViolation) as excinfo:
            compose_pipeline(parts, [(0, 0, 2, 0), (1, 0, 2, 1)])
        assert excinfo.value.rule == "no-overlay"

    def test_no_overlay_allows_plain_chains(self):
        parts = [source(usage_constraints=(NoOverlay(),)), algorithm()]
        assert len(compose_pipeline(parts, [(0, 0, 1, 0)]).nodes) == 2

    def test_vendor_deny(self):
        parts = [source(usage_constraints=(VendorDeny(consumers=("acme",)),)), algorithm()]
        with pytest.raises(ConstraintViolation, match="vendor-deny:acme"):
            compose_pipeline(parts, [(0, 0, 1, 0)], consumer="acme")
        assert compose_pipeline(parts, [(0, 0, 1, 0)], consumer="globex").nodes

    def test_no_cross_provider_aggregation(self):
        """Test that aggregation may not mix providers with a guarded asset."""
        guarded = source(provider="city", usage_constraints=(NoCrossProviderAggregation(),))
        other = source(output="crimes", provider="police")
        rollup = algorithm(
            goal="aggregation", inputs=("listings", "crimes"), output="stats", provider="city"
        )
        with pytest.raises(ConstraintViolation, match="no-cross-provider-aggregation"):
            compose_pipeline([guarded, other, rollup], [(0, 0, 2, 0), (1, 0, 2, 1)])

    def test_same_provider_aggregation_is_allowed(self):
        guarded = source(provider="city", usage_constraints=(NoCrossProviderAggregation(),))
        rollup = algorithm(goal="aggregation", output="stats", provider="city")
        assert compose_pipeline([guarded, rollup], [(0, 0, 1, 0)]).edges


class TestLogicalSignature:
    """Tests for canonical signature bytes."""

    def test_ignores_identity_and_pricing(self):
        """Test that only goal and types decide equivalence."""
        a = algorithm(id="linear", provider="a", name="one")
        b = algorithm(id="network", provider="b", name="two")
        assert logical_signature(a) == logical_signature(b)

    def test_normalizes_goal_and_categories(self):
        a = algorithm(goal="Regression ", inputs=(" Listings",))
        assert logical_signature(a) == logical_signature(algorithm())

    def test_input_order_matters(self):
        a = algorithm(goal="join", inputs=("listings", "crimes"))
        b = algorithm(goal="join", inputs=("crimes", "listings"))
        assert logical_signature(a) != logical_signature(b)
