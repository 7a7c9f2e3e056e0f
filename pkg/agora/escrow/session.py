"""
Simulated transfer sessions

A seeded lossy network drives the three roles step by step. Every send,
delivery, drop, state transition and payment lands in the transcript, so a
run is reproducible from its seed alone.
"""

import heapq
import random
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Tuple

import structlog
from pydantic import BaseModel, ConfigDict, Field

from agora.metering.ledger import Ledger
from agora.metering.settlement import (
    InMemoryPaymentBackend,
    PaymentBackend,
    Receipt,
    Settlement,
)
from agora.models.money import Money
from agora.models.usage import UsageEvent, UsageMetric

from .crypto import AesGcmCipher, Cipher
from .protocol import Message, MessageType, Role, sender_prepare
from .roles import MediatorRole, ProtocolRole, ReceiverRole, SenderRole

logger = structlog.get_logger(__name__)

COMPLETED = "Completed"
ABORTED = "Aborted"


class SimNetConfig(BaseModel):
    """Fault model of the simulated network."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    seed: int = 0
    drop_rate: float = Field(0.0, ge=0.0, lt=1.0)
    dup_rate: float = Field(0.0, ge=0.0, lt=1.0)
    max_delay_steps: int = Field(3, ge=1)
    max_retries: int = Field(10, ge=0)
    timeout_steps: Optional[int] = Field(None, ge=1)
    tamper_chunks: Tuple[int, ...] = ()
    max_steps: int = Field(10_000, ge=1)

    @property
    def effective_timeout(self) -> int:
        # a request and its reply may each take the full delay
        if self.timeout_steps is not None:
            return self.timeout_steps
        return 2 * self.max_delay_steps + 1


@dataclass(frozen=True)
class TranscriptRecord:
    step: int
    sender: str
    recipient: str
    type: str
    chunk: Optional[int]
    detail: str = ""

    def line(self) -> str:
        chunk = "-" if self.chunk is None else str(self.chunk)
        text = f"step={self.step} from={self.sender} to={self.recipient} type={self.type}"
        text += f" chunk={chunk}"
        return f"{text} {self.detail}" if self.detail else text


@dataclass
class Transcript:
    session_id: str
    records: List[TranscriptRecord] = field(default_factory=list)
    messages: List[Message] = field(default_factory=list)
    payments: List[Receipt] = field(default_factory=list)
    usage_events: List[UsageEvent] = field(default_factory=list)
    outcome: str = ""
    abort_reason: Optional[str] = None
    plaintext: bytes = b""
    steps: int = 0

    @property
    def completed(self) -> bool:
        return self.outcome == COMPLETED

    def lines(self) -> List[str]:
        return [record.line() for record in self.records]

    def render(self) -> str:
        summary = f"outcome={self.outcome}"
        if self.abort_reason:
            summary += f" reason={self.abort_reason}"
        return "\n".join([*self.lines(), summary]) + "\n"

    def index_of(self, type: str, chunk: int, detail: str) -> Optional[int]:
        """Position of the first record matching type, chunk and a detail substring."""
        for position, record in enumerate(self.records):
            if record.type == type and record.chunk == chunk and detail in record.detail:
                return position
        return None


class SimNetwork:
    """Seeded message queue that drops, delays, duplicates and tampers."""

    def __init__(self, config: SimNetConfig):
        self.config = config
        self.rng = random.Random(config.seed)
        self._queue: List[Tuple[int, int, Message]] = []
        self._seq = 0

    def _push(self, message: Message, step: int) -> int:
        at = step + self.rng.randint(1, self.config.max_delay_steps)
        heapq.heappush(self._queue, (at, self._seq, message))
        self._seq += 1
        return at

    def send(self, message: Message, step: int) -> List[str]:
        """Enqueue a message; returns what the network did with it."""
        if self.rng.random() < self.config.drop_rate:
            return ["dropped"]
        outcomes = [f"due={self._push(message, step)}"]
        if self.rng.random() < self.config.dup_rate:
            outcomes.append(f"duplicated due={self._push(message, step)}")
        return outcomes

    def deliveries(self, step: int) -> List[Message]:
        due: List[Message] = []
        while self._queue and self._queue[0][0] <= step:
            due.append(self.tamper(heapq.heappop(self._queue)[2]))
        return due

    def tamper(self, message: Message) -> Message:
        if (
            message.type == MessageType.CIPHERTEXT
            and message.chunk in self.config.tamper_chunks
            and message.payload
        ):
            flipped = bytes([message.payload[0] ^ 0x01]) + message.payload[1:]
            return replace(message, payload=flipped)
        return message

    @property
    def idle(self) -> bool:
        return not self._queue


class Session:
    """Shared context the roles talk through."""

    def __init__(
        self,
        session_id: str,
        config: SimNetConfig,
        settlement: Settlement,
        cipher: Cipher,
        chunk_count: int,
    ):
        self.session_id = session_id
        self.config = config
        self.settlement = settlement
        self.cipher = cipher
        self.chunk_count = chunk_count
        self.network = SimNetwork(config)
        self.transcript = Transcript(session_id)
        self.abort_reason: Optional[str] = None

    def record(
        self,
        step: int,
        sender: Role,
        recipient: Role,
        type: str,
        chunk: Optional[int],
        detail: str = "",
    ) -> None:
        self.transcript.records.append(
            TranscriptRecord(step, sender.value, recipient.value, type, chunk, detail)
        )

    def transmit(self, message: Message, step: int, retry: int = 0) -> None:
        self.transcript.messages.append(message)
        outcomes = self.network.send(message, step)
        detail = " ".join(["sent" if not retry else f"resent retry={retry}", *outcomes])
        if message.reason:
            detail += f" reason={message.reason}"
        self.record(step, message.sender, message.recipient, message.type.value, message.chunk,
                    detail)

    def record_payment(self, step: int, chunk: int, receipt: Receipt) -> None:
        self.transcript.payments.append(receipt)
        self.record(
            step,
            Role.RECEIVER,
            Role.SENDER,
            "payment",
            chunk,
            f"txn={receipt.txn.txn_id} amount={receipt.txn.amount} "
            f"status={receipt.status.value} attempts={receipt.attempts}",
        )

    def meter_transfer(self, nbytes: int, step: int) -> None:
        self.transcript.usage_events.append(
            UsageEvent(
                asset=f"transfer.{self.session_id}",
                metric=UsageMetric.BYTES,
                amount=nbytes,
                at=step,
                node=Role.SENDER.value,
                event_id=f"{self.session_id}:bytes:{len(self.transcript.usage_events)}",
            )
        )

    def abort(self, reason: str) -> None:
        if self.abort_reason is None:
            self.abort_reason = reason


def _seeded_keys(seed: int):
    rng = random.Random(f"escrow-keys-{seed}")
    return rng.randbytes


async def run_session(
    data: bytes,
    net: Optional[SimNetConfig] = None,
    backend: Optional[PaymentBackend] = None,
    chunk_bytes: int = 4096,
    price_per_chunk: Money = Money.of("0.01"),
    *,
    session_id: str = "session",
    payer: str = "receiver",
    payee: str = "sender",
    ledger: Optional[Ledger] = None,
    cipher: Optional[Cipher] = None,
) -> Transcript:
    """Run one escrowed transfer to completion or abort.

    Keys and nonces come from a generator seeded with the network seed, so
    identical inputs produce identical transcripts.
    """
    net = net or SimNetConfig()
    cipher = cipher or AesGcmCipher()
    transfer = sender_prepare(
        data,
        chunk_bytes,
        price_per_chunk,
        session_id=session_id,
        cipher=cipher,
        key_source=_seeded_keys(net.seed),
    )
    settlement = Settlement(
        backend or InMemoryPaymentBackend(), ledger=ledger, base_backoff_s=0.0, max_backoff_s=0.0
    )
    session = Session(session_id, net, settlement, cipher, len(transfer.manifests))
    sender = SenderRole(session, transfer)
    mediator = MediatorRole(session)
    receiver = ReceiverRole(session, payer, payee)
    roles: Dict[Role, ProtocolRole] = {
        Role.SENDER: sender,
        Role.MEDIATOR: mediator,
        Role.RECEIVER: receiver,
    }
    transcript = session.transcript

    step = 0
    sender.start(step)
    while session.abort_reason is None:
        for message in session.network.deliveries(step):
            session.record(
                step, message.sender, message.recipient, message.type.value, message.chunk,
                "delivered",
            )
            if message.type == MessageType.ABORT:
                continue
            await roles[message.recipient].handle(message, step)
            if session.abort_reason is not None:
                break
        if session.abort_reason is not None or (mediator.complete and receiver.complete):
            break
        for role in roles.values():
            role.tick(step)
            if session.abort_reason is not None:
                break
        if session.abort_reason is not None:
            break
        if session.network.idle and not any(r.pending for r in roles.values()):
            session.abort("stalled")
            break
        step += 1
        if step > net.max_steps:
            session.abort(f"no outcome after {net.max_steps} steps")

    transcript.steps = step
    if session.abort_reason is None:
        transcript.outcome = COMPLETED
        transcript.plaintext = receiver.assembled()
    else:
        transcript.outcome = ABORTED
        transcript.abort_reason = session.abort_reason
    logger.info(
        "escrow_session_finished",
        session_id=session_id,
        outcome=transcript.outcome,
        reason=transcript.abort_reason,
        chunks=session.chunk_count,
        steps=step,
        payments=len(transcript.payments),
    )
    return transcript
