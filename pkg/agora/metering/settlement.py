"""
Settlement
Payments are driven through a pluggable backend contract: execute a
transfer, then receive the completion notification. Transient backend
failures are retried with capped exponential backoff.
"""

import asyncio
from abc import ABC, abstractmethod
from enum import Enum
from typing import TYPE_CHECKING, Any, Awaitable, Callable, Dict, List, Optional, Sequence

import structlog
from pydantic import BaseModel, ConfigDict, Field, field_validator

from agora.errors import BackendUnavailable, InvalidTransition
from agora.models.money import Money

if TYPE_CHECKING:
    from .ledger import Ledger

logger = structlog.get_logger(__name__)


class PaymentStatus(str, Enum):
    PENDING = "pending"
    CONFIRMED = "confirmed"
    FAILED = "failed"


TERMINAL = frozenset({PaymentStatus.CONFIRMED, PaymentStatus.FAILED})


class PaymentTxn(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    txn_id: str = Field(min_length=1)
    payer: str
    payee: str
    amount: Money
    status: PaymentStatus = PaymentStatus.PENDING

    @field_validator("amount")
    @classmethod
    def _positive(cls, value: Money) -> Money:
        if value.micro_units <= 0:
            raise ValueError("payment amount must be positive")
        return value

    def transition(self, status: PaymentStatus) -> "PaymentTxn":
        """Pending may move to Confirmed or Failed; nothing else moves."""
        if self.status != PaymentStatus.PENDING or status not in TERMINAL:
            raise InvalidTransition(self.txn_id, self.status.value, status.value)
        return self.model_copy(update={"status": status})


class Receipt(BaseModel):
    model_config = ConfigDict(frozen=True)

    txn: PaymentTxn
    attempts: int
    reference: Optional[str] = None
    error: Optional[str] = None

    @property
    def status(self) -> PaymentStatus:
        return self.txn.status


class PaymentBackend(ABC):
    """Contract a payment method implements; fees are the backend's concern."""

    @abstractmethod
    async def execute(self, txn: PaymentTxn) -> str:
        """Start the transfer and return a backend reference.

        Raises BackendUnavailable for failures worth retrying.
        """

    @abstractmethod
    async def confirm(self, reference: str) -> bool:
        """Completion notification: True once the transfer settled, False if declined."""


class InMemoryPaymentBackend(PaymentBackend):
    """Fee-free reference backend keeping balances in memory"""

    def __init__(self, failures_before_success: int = 0, always_fail: bool = False):
        self.failures_before_success = failures_before_success
        self.always_fail = always_fail
        self.declined: set = set()
        self.balances: Dict[str, int] = {}
        self.calls = 0
        self._pending: Dict[str, PaymentTxn] = {}

    async def execute(self, txn: PaymentTxn) -> str:
        self.calls += 1
        if self.always_fail or self.calls <= self.failures_before_success:
            raise BackendUnavailable(f"attempt {self.calls} refused")
        reference = f"ref-{txn.txn_id}"
        self._pending[reference] = txn
        return reference

    async def confirm(self, reference: str) -> bool:
        txn = self._pending.pop(reference)
        if txn.payer in self.declined:
            return False
        amount = txn.amount.micro_units
        self.balances[txn.payer] = self.balances.get(txn.payer, 0) - amount
        self.balances[txn.payee] = self.balances.get(txn.payee, 0) + amount
        return True


Sleeper = Callable[[float], Awaitable[None]]


class Settlement:
    def __init__(
        self,
        backend: PaymentBackend,
        ledger: Optional["Ledger"] = None,
        attempts: int = 3,
        base_backoff_s: float = 0.05,
        max_backoff_s: float = 1.0,
        sleep: Sleeper = asyncio.sleep,
    ):
        self.backend = backend
        self.ledger = ledger
        self.attempts = attempts
        self.base_backoff_s = base_backoff_s
        self.max_backoff_s = max_backoff_s
        self.sleep = sleep

    def backoff(self, attempt: int) -> float:
        return min(self.base_backoff_s * 2 ** (attempt - 1), self.max_backoff_s)

    async def settle_one(self, txn: PaymentTxn) -> Receipt:
        if self.ledger is not None:
            self.ledger.record(txn)
        error: Optional[str] = None
        reference: Optional[str] = None
        for attempt in range(1, self.attempts + 1):
            try:
                # an executed payment is only re-confirmed, never executed twice
                if reference is None:
                    reference = await self.backend.execute(txn)
                confirmed = await self.backend.confirm(reference)
            except BackendUnavailable as exc:
                error = str(exc)
                logger.warning(
                    "payment_attempt_failed", txn_id=txn.txn_id, attempt=attempt, error=error
                )
                if attempt < self.attempts:
                    await self.sleep(self.backoff(attempt))
                continue
            status = PaymentStatus.CONFIRMED if confirmed else PaymentStatus.FAILED
            return self._finish(txn, status, attempt, reference, None if confirmed else "declined")
        return self._finish(txn, PaymentStatus.FAILED, self.attempts, reference, error)

    def _finish(
        self,
        txn: PaymentTxn,
        status: PaymentStatus,
        attempts: int,
        reference: Optional[str],
        error: Optional[str],
    ) -> Receipt:
        final = txn.transition(status)
        if self.ledger is not None:
            self.ledger.finalize(final)
        logger.info(
            "payment_settled", txn_id=txn.txn_id, status=status.value, attempts=attempts
        )
        return Receipt(txn=final, attempts=attempts, reference=reference, error=error)

    async def settle(self, txns: Sequence[PaymentTxn]) -> List[Receipt]:
        return [await self.settle_one(t) for t in txns]


async def settle(
    txns: Sequence[PaymentTxn],
    backend: PaymentBackend,
    ledger: Optional["Ledger"] = None,
    **options: Any,
) -> List[Receipt]:
    """Drive every pending txn to Confirmed or Failed, in order."""
    return await Settlement(backend, ledger, **options).settle(txns)

