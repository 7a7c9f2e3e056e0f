"""
Money in integer micro-units
1 currency unit = 1,000,000 micro-units; there is no float money anywhere.
"""

import math
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Any, List, Sequence, Union

from pydantic import BaseModel, ConfigDict, field_validator, model_serializer, model_validator

MICRO = 1_000_000
INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


class Money(BaseModel):
    """Exact amount; serialized as a bare integer of micro-units."""

    model_config = ConfigDict(frozen=True)

    micro_units: int

    @model_validator(mode="before")
    @classmethod
    def _from_integer(cls, value: Any) -> Any:
        if isinstance(value, bool):
            raise ValueError("money must be an integer number of micro-units")
        if isinstance(value, int):
            return {"micro_units": value}
        return value

    @field_validator("micro_units")
    @classmethod
    def _in_range(cls, value: int) -> int:
        if not INT64_MIN <= value <= INT64_MAX:
            raise ValueError("money outside the signed 64-bit range")
        return value

    @model_serializer
    def _serialize(self) -> int:
        return self.micro_units

    @classmethod
    def zero(cls) -> "Money":
        return cls(micro_units=0)

    @classmethod
    def micro(cls, micro_units: int) -> "Money":
        return cls(micro_units=micro_units)

    @classmethod
    def of(cls, amount: Union[str, int, Decimal]) -> "Money":
        """Parse a decimal amount in currency units, e.g. "2.50" or "$1"."""
        text = str(amount).strip()
        negative = text.startswith("-")
        text = text.lstrip("-").lstrip("$").replace("_", "")
        try:
            units = Decimal(text)
        except InvalidOperation as exc:
            raise ValueError(f"not a money amount: {amount!r}") from exc
        if not units.is_finite():
            raise ValueError(f"not a money amount: {amount!r}")
        scaled = units * MICRO
        if scaled != scaled.to_integral_value():
            raise ValueError(f"{amount!r} is finer than one micro-unit")
        value = int(scaled)
        return cls(micro_units=-value if negative else value)

    @classmethod
    def from_fraction(cls, value: Fraction) -> "Money":
        """Floor an exact micro-unit quantity."""
        return cls(micro_units=math.floor(value))

    def __add__(self, other: "Money") -> "Money":
        if not isinstance(other, Money):
            return NotImplemented
        return Money(micro_units=self.micro_units + other.micro_units)

    def __radd__(self, other: Any) -> "Money":
        if other == 0:
            return self
        return NotImplemented

    def __sub__(self, other: "Money") -> "Money":
        if not isinstance(other, Money):
            return NotImplemented
        return Money(micro_units=self.micro_units - other.micro_units)

    def __neg__(self) -> "Money":
        return Money(micro_units=-self.micro_units)

    def __mul__(self, factor: int) -> "Money":
        if isinstance(factor, bool) or not isinstance(factor, int):
            return NotImplemented
        return Money(micro_units=self.micro_units * factor)

    __rmul__ = __mul__

    def __lt__(self, other: "Money") -> bool:
        return self.micro_units < other.micro_units

    def __le__(self, other: "Money") -> bool:
        return self.micro_units <= other.micro_units

    def __gt__(self, other: "Money") -> bool:
        return self.micro_units > other.micro_units

    def __ge__(self, other: "Money") -> bool:
        return self.micro_units >= other.micro_units

    def __bool__(self) -> bool:
        return self.micro_units != 0

    def __str__(self) -> str:
        sign = "-" if self.micro_units < 0 else ""
        units, rest = divmod(abs(self.micro_units), MICRO)
        decimals = f"{rest:06d}".rstrip("0").ljust(2, "0")
        return f"{sign}${units}.{decimals}"


def round_preserving_sum(exact: Sequence[Fraction]) -> List[int]:
    """Largest-remainder rounding.

    Every value is floored, then the shortfall to floor(sum) is handed out one
    unit at a time by descending fractional part, ties to the earlier position.
    """
    floors = [math.floor(x) for x in exact]
    shortfall = math.floor(sum(exact, Fraction(0))) - sum(floors)
    order = sorted(range(len(exact)), key=lambda i: (-(exact[i] - floors[i]), i))
    for i in order[:shortfall]:
        floors[i] += 1
    return floors


def apportion(total: int, weights: Sequence[Fraction]) -> List[int]:
    """Split an integer total by weights summing to 1, conserving it exactly."""
    return round_preserving_sum([total * Fraction(w) for w in weights])
