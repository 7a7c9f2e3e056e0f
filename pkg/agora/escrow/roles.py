"""
Protocol roles as event-driven state machines

Each role reacts to delivered messages and to timer ticks. Every request a
role sends is kept pending until its reply arrives and is resent after the
timeout, up to the retry limit; duplicates are answered idempotently.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Dict, Optional, Tuple

from agora.errors import DecryptionFailed
from agora.metering.settlement import PaymentStatus, PaymentTxn

from .protocol import (
    ChunkManifest,
    ChunkState,
    KeyRelease,
    MediatorState,
    Message,
    MessageType,
    PreparedTransfer,
    Role,
    VerifyOutcome,
    receiver_verify_chunk,
    release_key,
)

if TYPE_CHECKING:
    from .session import Session

# request type -> reply type that settles it
REPLIES = {
    MessageType.DEPOSIT: MessageType.DEPOSIT_ACK,
    MessageType.MANIFEST: MessageType.MANIFEST_ACK,
    MessageType.CIPHERTEXT: MessageType.CIPHERTEXT_ACK,
    MessageType.PAYMENT_PROOF: MessageType.KEY,
    MessageType.KEY: MessageType.DECRYPTED,
}


@dataclass
class Pending:
    message: Message
    due: int
    retries: int = 0


class ProtocolRole:
    role: Role

    def __init__(self, session: "Session"):
        self.session = session
        self.states: Dict[int, ChunkState] = {}
        self.pending: Dict[Tuple[MessageType, int], Pending] = {}
        self.aborted: Optional[str] = None

    def state(self, chunk: int) -> ChunkState:
        return self.states.get(chunk, ChunkState.INIT)

    def transition(self, chunk: int, state: ChunkState, step: int) -> None:
        previous = self.state(chunk)
        if previous == state:
            return
        self.states[chunk] = state
        self.session.record(
            step, self.role, self.role, "state", chunk, f"{previous.value}->{state.value}"
        )

    def send(self, step: int, type: MessageType, recipient: Role, chunk: int, **fields) -> None:
        message = Message(
            type=type,
            sender=self.role,
            recipient=recipient,
            session_id=self.session.session_id,
            chunk=chunk,
            **fields,
        )
        if type in REPLIES:
            self.pending[(REPLIES[type], chunk)] = Pending(
                message, step + self.session.config.effective_timeout
            )
        self.session.transmit(message, step)

    def settle(self, reply: MessageType, chunk: int) -> bool:
        return self.pending.pop((reply, chunk), None) is not None

    def tick(self, step: int) -> None:
        for key in sorted(self.pending, key=lambda k: (k[1], k[0].value)):
            entry = self.pending.get(key)
            if entry is None or entry.due > step or self.aborted:
                continue
            if entry.retries >= self.session.config.max_retries:
                self.abort(
                    step, f"timeout waiting for {key[0].value} on chunk {entry.message.chunk}"
                )
                return
            entry.retries += 1
            entry.due = step + self.session.config.effective_timeout
            self.session.transmit(entry.message, step, retry=entry.retries)

    def abort(self, step: int, reason: str) -> None:
        if self.aborted is not None:
            return
        self.aborted = reason
        self.pending.clear()
        for chunk in sorted(self.states):
            self.transition(chunk, ChunkState.ABORTED, step)
        for other in Role:
            if other != self.role:
                self.session.transmit(
                    Message(
                        type=MessageType.ABORT,
                        sender=self.role,
                        recipient=other,
                        session_id=self.session.session_id,
                        reason=reason,
                    ),
                    step,
                )
        self.session.abort(reason)

    async def handle(self, message: Message, step: int) -> None:
        raise NotImplementedError


class SenderRole(ProtocolRole):
    role = Role.SENDER

    def __init__(self, session: "Session", transfer: PreparedTransfer):
        super().__init__(session)
        self.transfer = transfer

    def start(self, step: int) -> None:
        for manifest, key in zip(self.transfer.manifests, self.transfer.keys):
            self.send(
                step,
                MessageType.DEPOSIT,
                Role.MEDIATOR,
                manifest.chunk_index,
                manifest=manifest,
                key=key,
            )

    async def handle(self, message: Message, step: int) -> None:
        chunk = message.chunk if message.chunk is not None else -1
        if message.type == MessageType.DEPOSIT_ACK:
            self.settle(MessageType.DEPOSIT_ACK, chunk)
            if self.state(chunk) == ChunkState.INIT:
                self.transition(chunk, ChunkState.MANIFEST_REGISTERED, step)
                self.send(
                    step,
                    MessageType.CIPHERTEXT,
                    Role.RECEIVER,
                    chunk,
                    payload=self.transfer.ciphertexts[chunk],
                )
                self.transition(chunk, ChunkState.CIPHERTEXT_SENT, step)
        elif message.type == MessageType.CIPHERTEXT_ACK:
            if self.settle(MessageType.CIPHERTEXT_ACK, chunk):
                self.transition(chunk, ChunkState.COMPLETED, step)


class MediatorRole(ProtocolRole):
    role = Role.MEDIATOR

    def __init__(self, session: "Session"):
        super().__init__(session)
        self.escrow = MediatorState(session.session_id)

    @property
    def complete(self) -> bool:
        total = self.session.chunk_count
        return total > 0 and all(
            self.state(i) == ChunkState.COMPLETED for i in range(total)
        )

    async def handle(self, message: Message, step: int) -> None:
        chunk = message.chunk if message.chunk is not None else -1
        if message.type == MessageType.DEPOSIT:
            assert message.manifest is not None and message.key is not None
            if self.escrow.register(message.manifest, message.key):
                self.transition(chunk, ChunkState.MANIFEST_REGISTERED, step)
                self.send(
                    step, MessageType.MANIFEST, Role.RECEIVER, chunk, manifest=message.manifest
                )
            self.send(step, MessageType.DEPOSIT_ACK, Role.SENDER, chunk)
        elif message.type == MessageType.MANIFEST_ACK:
            self.settle(MessageType.MANIFEST_ACK, chunk)
        elif message.type == MessageType.PAYMENT_PROOF:
            assert message.txn is not None
            outcome = release_key(self.escrow, chunk, message.txn)
            if not isinstance(outcome, KeyRelease):
                self.abort(step, f"key refused for chunk {chunk}: {outcome.reason}")
                return
            if outcome.resent and (MessageType.DECRYPTED, chunk) in self.pending:
                return
            if outcome.resent:
                self.send(step, MessageType.KEY, Role.RECEIVER, chunk, key=outcome.key)
                return
            self.transition(chunk, ChunkState.PAYMENT_ISSUED, step)
            self.send(step, MessageType.KEY, Role.RECEIVER, chunk, key=outcome.key)
            self.transition(chunk, ChunkState.KEY_RELEASED, step)
        elif message.type == MessageType.DECRYPTED:
            self.settle(MessageType.DECRYPTED, chunk)
            if self.state(chunk) == ChunkState.KEY_RELEASED:
                self.transition(chunk, ChunkState.COMPLETED, step)


class ReceiverRole(ProtocolRole):
    role = Role.RECEIVER

    def __init__(self, session: "Session", payer: str, payee: str):
        super().__init__(session)
        self.payer = payer
        self.payee = payee
        self.manifests: Dict[int, ChunkManifest] = {}
        self.ciphertexts: Dict[int, bytes] = {}
        self.payments: Dict[int, PaymentTxn] = {}
        self.plaintexts: Dict[int, bytes] = {}

    @property
    def complete(self) -> bool:
        total = self.session.chunk_count
        return total > 0 and all(
            self.state(i) == ChunkState.COMPLETED for i in range(total)
        )

    def assembled(self) -> bytes:
        return b"".join(self.plaintexts[i] for i in sorted(self.plaintexts))

    async def handle(self, message: Message, step: int) -> None:
        chunk = message.chunk if message.chunk is not None else -1
        if message.type == MessageType.MANIFEST:
            assert message.manifest is not None
            self.manifests.setdefault(chunk, message.manifest)
            self.send(step, MessageType.MANIFEST_ACK, Role.MEDIATOR, chunk)
            await self.verify_and_pay(chunk, step)
        elif message.type == MessageType.CIPHERTEXT:
            assert message.payload is not None
            if chunk not in self.ciphertexts:
                self.ciphertexts[chunk] = message.payload
                self.session.meter_transfer(len(message.payload), step)
            self.send(step, MessageType.CIPHERTEXT_ACK, Role.SENDER, chunk)
            await self.verify_and_pay(chunk, step)
        elif message.type == MessageType.KEY:
            self.settle(MessageType.KEY, chunk)
            if self.state(chunk) == ChunkState.PAYMENT_ISSUED:
                assert message.key is not None
                try:
                    plaintext = self.session.cipher.decrypt(
                        message.key, self.ciphertexts[chunk], chunk
                    )
                except DecryptionFailed as exc:
                    self.abort(step, str(exc))
                    return
                self.transition(chunk, ChunkState.KEY_RELEASED, step)
                self.plaintexts[chunk] = plaintext
                self.transition(chunk, ChunkState.COMPLETED, step)
            if self.state(chunk) == ChunkState.COMPLETED:
                self.send(step, MessageType.DECRYPTED, Role.MEDIATOR, chunk)

    async def verify_and_pay(self, chunk: int, step: int) -> None:
        if self.state(chunk) != ChunkState.INIT:
            return
        manifest, ciphertext = self.manifests.get(chunk), self.ciphertexts.get(chunk)
        if manifest is None or ciphertext is None:
            return
        if receiver_verify_chunk(ciphertext, manifest) != VerifyOutcome.VERIFIED:
            self.session.record(step, self.role, self.role, "verify", chunk, "digest_mismatch")
            self.abort(step, f"digest mismatch on chunk {chunk}")
            return
        self.transition(chunk, ChunkState.INTEGRITY_VERIFIED, step)

        txn = PaymentTxn(
            txn_id=f"{self.session.session_id}-{chunk}",
            payer=self.payer,
            payee=self.payee,
            amount=manifest.price,
        )
        receipt = await self.session.settlement.settle_one(txn)
        self.session.record_payment(step, chunk, receipt)
        if receipt.status != PaymentStatus.CONFIRMED:
            self.abort(step, f"payment for chunk {chunk} {receipt.status.value}")
            return
        self.payments[chunk] = receipt.txn
        self.transition(chunk, ChunkState.PAYMENT_ISSUED, step)
        self.send(step, MessageType.PAYMENT_PROOF, Role.MEDIATOR, chunk, txn=receipt.txn)

