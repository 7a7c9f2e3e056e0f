"""Unit tests for the nested-loop reference evaluator."""
import pytest

from agora.errors import ArithmeticOverflow, MissingTable
from agora.query import compile_program, evaluate_select

TABLES = """
REGISTER TABLE people AT EU CARD 4 ROWBYTES 32 COLS (pid INT, city TEXT, age INT);
REGISTER TABLE orders AT NA CARD 5 ROWBYTES 16 COLS (oid INT, buyer INT, total FLOAT);
"""

DB = {
    "people": [(1, "berlin", 30), (2, "berlin", None), (3, "paris", 41), (4, "rome", 25)],
    "orders": [(10, 1, 5.0), (11, 1, 7.5), (12, 3, 2.0), (13, None, 1.0), (14, 9, 4.0)],
}


def run(query: str, db=DB):
    program = compile_program(TABLES + query)
    return evaluate_select(program.queries[0], program.registry, db)


class TestEvaluateSelect:
    """Tests for bag-semantics evaluation."""

    def test_star_labels_are_qualified(self):
        labels, rows = run("SELECT * FROM people WHERE city = 'rome';")
        assert labels == ("people.pid", "people.city", "people.age")
        assert rows == [(4, "rome", 25)]

    def test_join_drops_null_keys(self):
        """Test that NULL never equals anything in an equi-join."""
        _, rows = run("SELECT oid, city FROM people, orders WHERE pid = buyer;")
        assert sorted(rows) == [(10, "berlin"), (11, "berlin"), (12, "paris")]

    def test_filters_skip_nulls(self):
        _, rows = run("SELECT pid FROM people WHERE age < 100;")
        assert [r[0] for r in rows] == [1, 3, 4]

    def test_group_by_with_aggregates(self):
        labels, rows = run(
            "SELECT city, COUNT(*), COUNT(age), AVG(age), MAX(age) "
            "FROM people GROUP BY city;"
        )
        assert labels == (
            "people.city",
            "COUNT(*)",
            "COUNT(people.age)",
            "AVG(people.age)",
            "MAX(people.age)",
        )
        assert sorted(rows) == [
            ("berlin", 2, 1, 30.0, 30),
            ("paris", 1, 1, 41.0, 41),
            ("rome", 1, 1, 25.0, 25),
        ]

    def test_aggregate_over_empty_input(self):
        """Test that an ungrouped aggregate yields one row even with no input."""
        _, rows = run("SELECT COUNT(*), SUM(total) FROM orders WHERE total > 100.0;")
        assert rows == [(0, None)]

    def test_grouped_aggregate_over_empty_input(self):
        _, rows = run("SELECT city, COUNT(*) FROM people WHERE age > 99 GROUP BY city;")
        assert rows == []

    def test_integer_sum_overflow(self):
        db = {**DB, "people": [(1, "x", 2**62), (2, "x", 2**62)]}
        with pytest.raises(ArithmeticOverflow):
            run("SELECT SUM(age) FROM people;", db)

    def test_missing_table_data(self):
        with pytest.raises(MissingTable):
            run("SELECT * FROM orders;", {"people": DB["people"]})
