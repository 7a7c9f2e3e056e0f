"""Unit tests for descriptor validation."""
import pytest

from agora.assets import validate_descriptor
from agora.models import (
    AssetKind,
    CertificateRequirement,
    Column,
    ColumnType,
    LogicalSignature,
    PipelineGraph,
    PipelineNode,
    RevenueShareTree,
    Schema,
    VendorDeny,
)
from agora.models.money import Money
from agora.models.pricing import Subscription
from tests.factories import DataSourceFactory, DescriptorFactory


class TestValidateDescriptor:
    """Tests for the semantic descriptor checks."""

    def test_valid_descriptors_pass(self):
        assert validate_descriptor(DescriptorFactory()).ok
        assert validate_descriptor(DataSourceFactory()).ok

    @pytest.mark.parametrize("bad_id", ["", "has space", "slash/inside", "x" * 129])
    def test_rejects_bad_ids(self, bad_id):
        """Test the URL-safe id charset and length limit."""
        report = validate_descriptor(DescriptorFactory(id=bad_id))
        assert [v.field for v in report.violations] == ["id"]

    def test_goal_outside_taxonomy(self):
        signature = LogicalSignature(goal="astrology", input_types=(), output_type="x")
        report = validate_descriptor(DescriptorFactory(signature=signature))
        assert "goal 'astrology' not in taxonomy" in report.rules()

    def test_goal_matching_is_case_insensitive(self):
        signature = LogicalSignature(goal=" Regression ", input_types=(), output_type="x")
        assert validate_descriptor(DescriptorFactory(signature=signature)).ok

    def test_data_source_requires_region(self):
        """Test that regional kinds must name where they live."""
        report = validate_descriptor(DataSourceFactory(region=None))
        assert report.rules() == ["data_source requires region"]

    def test_pipeline_requires_graph(self):
        report = validate_descriptor(DescriptorFactory(kind=AssetKind.PIPELINE))
        assert "pipeline requires graph" in report.rules()

    def test_only_pipelines_carry_graphs(self):
        graph = PipelineGraph(
            nodes=(PipelineNode(node_id="n0", asset_ref="x", role_category="scan"),)
        )
        report = validate_descriptor(DescriptorFactory(graph=graph))
        assert "only pipelines carry a graph" in report.rules()

    def test_duplicate_schema_columns(self):
        schema = Schema(
            columns=(
                Column(name="price", type=ColumnType.FLOAT64),
                Column(name="price", type=ColumnType.INT64),
            )
        )
        signature = LogicalSignature(goal="data-source", output_type=schema)
        report = validate_descriptor(DataSourceFactory(signature=signature))
        assert "column names must be unique" in report.rules()

    def test_negative_price_and_period(self):
        """Test that pricing amounts and periods are checked."""
        pricing = Subscription(price=Money.of("-1"), period_s=0)
        report = validate_descriptor(DescriptorFactory(pricing=pricing))
        assert {v.field for v in report.violations} == {"pricing", "pricing.period_s"}

    def test_certificate_requirement_needs_an_authority(self):
        requirement = CertificateRequirement(property="tee")
        report = validate_descriptor(DescriptorFactory(required_certificates=(requirement,)))
        assert report.rules() == ["at least one authority"]

    def test_vendor_deny_names_consumers(self):
        report = validate_descriptor(DescriptorFactory(usage_constraints=(VendorDeny(),)))
        assert report.rules() == ["vendor deny names no consumer"]

    def test_share_tree_must_sum_to_one(self):
        """Test that every sibling group of a share tree sums to exactly one."""
        tree = RevenueShareTree(
            beneficiary="root",
            children=(
                RevenueShareTree(beneficiary="a", share="1/3"),
                RevenueShareTree(beneficiary="b", share="1/3"),
            ),
        )
        report = validate_descriptor(DescriptorFactory(revenue_share=tree))
        assert report.rules() == ["shares sum 2/3 ≠ 1"]

    def test_share_tree_depth_limit(self):
        tree = RevenueShareTree(beneficiary="leaf")
        for level in range(9):
            tree = RevenueShareTree(beneficiary=f"level-{level}", children=(tree,))
        report = validate_descriptor(DescriptorFactory(revenue_share=tree))
        assert any("exceeds 8" in rule for rule in report.rules())

    def test_reports_every_violation(self):
        """Test that validation collects all problems instead of stopping early."""
        report = validate_descriptor(DataSourceFactory(id="", name=" ", region=None))
        assert {v.field for v in report.violations} == {"id", "name", "region"}
