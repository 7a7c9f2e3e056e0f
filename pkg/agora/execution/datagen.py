"""
Synthetic databases that respect registered statistics

Integer columns draw from a domain the size of their distinct count, so a
key column (distinct = rows) is a permutation and foreign keys referencing
it join. Floats are multiples of 0.25 so sums stay exact in any order.
"""

import random
from datetime import date, timedelta
from typing import Any, Dict, List

from agora.models.assets import ColumnType
from agora.query.reference import Row
from agora.query.registry import TableRegistry

EPOCH = date(2024, 1, 1)


def _domain(distinct: int, row_count: int, rows: int) -> int:
    if row_count <= 0:
        return 1
    return max(1, min(rows, round(distinct * rows / row_count)))


def _value(column_type: ColumnType, k: int, name: str) -> Any:
    if column_type == ColumnType.INT64:
        return k
    if column_type == ColumnType.FLOAT64:
        return k * 0.25
    if column_type == ColumnType.TEXT:
        return f"{name}_{k}"
    if column_type == ColumnType.BOOL:
        return k % 2 == 0
    return (EPOCH + timedelta(days=k)).isoformat()


def generate_database(
    registry: TableRegistry, seed: int = 0, max_rows: int = 200
) -> Dict[str, List[Row]]:
    rng = random.Random(seed)
    db: Dict[str, List[Row]] = {}
    for name in registry.names():
        table = registry.table(name)
        rows = min(table.row_count, max_rows)
        columns: List[List[Any]] = []
        for column in table.columns:
            distinct = column.distinct if column.distinct is not None else table.row_count
            domain = _domain(distinct, table.row_count, rows)
            if domain == rows:
                keys = list(range(rows))
                rng.shuffle(keys)
            else:
                keys = [rng.randrange(domain) for _ in range(rows)]
            columns.append([_value(column.type, k, column.name) for k in keys])
        db[name] = [tuple(col[i] for col in columns) for i in range(rows)]
    return db
