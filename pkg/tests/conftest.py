"""pytest configuration and fixtures."""
import json
from pathlib import Path
from typing import Callable, Iterable

import pytest
import structlog

from agora.catalog import Marketplace
from agora.execution import AuthorityRegistry
from agora.query import Program, compile_program
from tests.factories import DataSourceFactory, DescriptorFactory

TPCH_TABLES = """
REGISTER TABLE nation AT ME CARD 25 ROWBYTES 16
    COLS (n_nationkey INT DISTINCT 25, n_name TEXT DISTINCT 25);
REGISTER TABLE customer AT EU CARD 1500 ROWBYTES 200
    COLS (c_custkey INT DISTINCT 1500, c_nationkey INT DISTINCT 25);
REGISTER TABLE orders AT EU CARD 15000 ROWBYTES 120
    COLS (o_orderkey INT DISTINCT 15000, o_custkey INT DISTINCT 1500,
          o_shippriority INT DISTINCT 60);
REGISTER TABLE lineitem AT NA CARD 600 ROWBYTES 150
    COLS (l_orderkey INT DISTINCT 600, l_quantity FLOAT);
"""

TPCH_QUERY = """
SELECT n_name, SUM(l_quantity)
FROM nation, customer, orders, lineitem
WHERE n_nationkey = c_nationkey AND c_custkey = o_custkey AND o_orderkey = l_orderkey
  AND o_shippriority = 0
GROUP BY n_name;
"""

DENY_NA_TO_EU = "CONSTRAINT DENY SHIP FROM NA TO EU;\n"


@pytest.fixture(autouse=True)
def reset_structlog():
    """Keep structlog configuration from leaking between tests."""
    yield
    structlog.reset_defaults()


@pytest.fixture
def tpch_text() -> str:
    """Four-table join across three regions, NA data barred from the EU."""
    return TPCH_TABLES + DENY_NA_TO_EU + TPCH_QUERY


@pytest.fixture
def tpch_program(tpch_text) -> Program:
    return compile_program(tpch_text)


@pytest.fixture
def tpch_unrestricted() -> Program:
    return compile_program(TPCH_TABLES + TPCH_QUERY)


@pytest.fixture
def marketplace() -> Marketplace:
    """A marketplace holding one data source and one algorithm that fits it."""
    market = Marketplace("test-market")
    market.publish(DataSourceFactory(id="listings"))
    market.publish(DescriptorFactory(id="elastic-net"))
    return market


@pytest.fixture
def authorities() -> AuthorityRegistry:
    return AuthorityRegistry({"eu-authority": "eu-secret", "us-authority": "us-secret"})


@pytest.fixture
def write_lines(tmp_path: Path) -> Callable[[str, Iterable[str]], Path]:
    """Write newline-delimited documents to a temp file and return its path."""

    def write(name: str, lines: Iterable[str]) -> Path:
        path = tmp_path / name
        path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
        return path

    return write


@pytest.fixture
def write_json(tmp_path: Path) -> Callable[[str, object], Path]:
    def write(name: str, document: object) -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return path

    return write
