"""Unit tests for the cost model and cardinality estimates."""
import pytest
from pydantic import ValidationError

from agora.models.regions import Region
from agora.planner import CostModel, SitePlanBuilder, estimate_cardinality, estimate_cost
from agora.query import ColumnRef, FilterPredicate, JoinPredicate


@pytest.fixture
def builder(tpch_program):
    return SitePlanBuilder(tpch_program.registry)


class TestCostModel:
    """Tests for per-route shipping rates."""

    def test_defaults(self):
        model = CostModel()
        assert model.ship_rate(Region.EU, Region.NA) == 0.01
        assert model.ship_rate(Region.EU, Region.EU) == 0.0

    def test_symmetric_lookup(self):
        model = CostModel(ship_cost_per_byte={"EU->NA": 0.5})
        assert model.ship_rate(Region.NA, Region.EU) == 0.5
        asymmetric = CostModel(ship_cost_per_byte={"EU->NA": 0.5}, symmetric=False)
        assert asymmetric.ship_rate(Region.NA, Region.EU) == 0.01

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"ship_cost_per_byte": {"EU-NA": 1.0}},
            {"ship_cost_per_byte": {"EU->EU": 1.0}},
            {"ship_cost_per_byte": {"EU->MARS": 1.0}},
            {"ship_cost_per_byte": {"EU->NA": -1.0}},
            {"default_ship_cost_per_byte": float("inf")},
            {"cpu_cost_per_row": -0.1},
        ],
    )
    def test_rejects_bad_rates(self, kwargs):
        with pytest.raises(ValidationError):
            CostModel(**kwargs)


class TestEstimateCost:
    """Tests for plan cost: shipped bytes plus CPU per input row."""

    def test_scan_then_ship(self, builder, tpch_program):
        """Test that a SHIP costs rows x row width x route rate."""
        plan = builder.ship(builder.scan("lineitem"), Region.EU)
        assert estimate_cost(plan, CostModel()) == pytest.approx(600 * 0.001 + 600 * 150 * 0.01)
        assert estimate_cost(plan, CostModel(), tpch_program.registry) == pytest.approx(900.6)

    def test_join_charges_both_inputs(self, builder):
        join = builder.join(
            [JoinPredicate(ColumnRef("customer", "c_custkey"), ColumnRef("orders", "o_custkey"))],
            builder.scan("customer"),
            builder.scan("orders"),
            Region.EU,
        )
        assert estimate_cost(join, CostModel()) == pytest.approx((1500 + 15000) * 2 * 0.001)

    def test_free_cpu(self, builder):
        plan = builder.scan("orders")
        assert estimate_cost(plan, CostModel(cpu_cost_per_row=0.0)) == 0.0


class TestCardinality:
    """Tests for independence-assumption estimates."""

    def test_equi_join_divides_by_larger_distinct(self, builder, tpch_program):
        key = ColumnRef("customer", "c_nationkey")
        join = builder.join(
            [JoinPredicate(ColumnRef("nation", "n_nationkey"), key)],
            builder.scan("nation"),
            builder.scan("customer"),
            Region.EU,
        )
        assert join.rows == pytest.approx(25 * 1500 / 25)
        assert join.row_bytes == 16 + 200
        assert estimate_cardinality(join, tpch_program.registry) == pytest.approx(join.rows)

    def test_filter_selectivity(self, builder):
        """Test equality as 1/distinct and everything else as the default."""
        scan = builder.scan("customer")
        key = ColumnRef("customer", "c_nationkey")
        assert builder.filter(FilterPredicate(key, "=", 7), scan).rows == pytest.approx(60)
        assert builder.filter(FilterPredicate(key, ">", 7), scan).rows == pytest.approx(150)

    def test_aggregate_caps_at_group_count(self, builder):
        scan = builder.scan("customer")
        grouped = builder.aggregate([ColumnRef("customer", "c_nationkey")], [], scan, Region.EU)
        assert grouped.rows == 25
