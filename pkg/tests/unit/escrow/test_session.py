"""Unit tests for simulated escrow sessions over a lossy network."""
import random

import pytest

from agora.escrow import MessageType, Role, SimNetConfig, run_session
from agora.metering import InMemoryPaymentBackend, Ledger, PaymentStatus
from agora.models.money import Money

DATA = random.Random(7).randbytes(10_240)
CHUNK = 2048
CHUNKS = 5


async def simulate(**net):
    backend = net.pop("backend", None)
    return await run_session(DATA, SimNetConfig(**net), backend, chunk_bytes=CHUNK)


def assert_key_follows_payment(transcript, chunk):
    """The mediator never sends a key before the receiver's confirmed payment."""
    key_sent = transcript.index_of("key", chunk, "sent")
    if key_sent is None:
        return
    paid = transcript.index_of("payment", chunk, "status=confirmed")
    assert paid is not None and paid < key_sent


class TestReliableNetwork:
    """Tests for sessions without faults."""

    async def test_completes(self):
        transcript = await simulate()
        assert transcript.completed
        assert transcript.plaintext == DATA
        assert sorted(r.txn.txn_id for r in transcript.payments) == [
            f"session-{i}" for i in range(CHUNKS)
        ]
        assert transcript.render().endswith("outcome=Completed\n")

    async def test_receiver_pays_each_chunk(self):
        backend = InMemoryPaymentBackend()
        transcript = await run_session(
            DATA, SimNetConfig(), backend, chunk_bytes=CHUNK, price_per_chunk=Money.of("0.02")
        )
        assert transcript.completed
        assert backend.balances == {"receiver": -100_000, "sender": 100_000}

    async def test_ciphertext_waits_for_the_deposit(self):
        """Test that the sender ships a chunk only once the mediator holds its key."""
        transcript = await simulate()
        for chunk in range(CHUNKS):
            acked = transcript.index_of("deposit_ack", chunk, "delivered")
            shipped = transcript.index_of("ciphertext", chunk, "sent")
            assert acked < shipped

    async def test_mediator_never_carries_data(self):
        transcript = await simulate(drop_rate=0.2, dup_rate=0.2, seed=3)
        from_mediator = [m for m in transcript.messages if m.sender == Role.MEDIATOR]
        assert from_mediator
        assert not any(m.carries_data for m in from_mediator)
        carrying = {m.type for m in transcript.messages if m.carries_data}
        assert carrying == {MessageType.CIPHERTEXT}

    async def test_transfer_bytes_metered_once(self):
        transcript = await simulate(dup_rate=0.5, seed=11)
        assert transcript.completed
        metered = sum(e.amount for e in transcript.usage_events)
        # nonce and tag per chunk
        assert metered == len(DATA) + CHUNKS * (12 + 16)

    async def test_ledger_records_every_payment(self):
        ledger = Ledger()
        transcript = await run_session(DATA, ledger=ledger, chunk_bytes=CHUNK)
        assert transcript.completed
        assert [t.status for t in ledger.history()] == [PaymentStatus.CONFIRMED] * CHUNKS
        ledger.close()


class TestLossyNetwork:
    """Tests for drops, duplicates and delays."""

    @pytest.mark.parametrize("seed", range(100))
    async def test_completes_despite_drops(self, seed):
        transcript = await simulate(seed=seed, drop_rate=0.2, dup_rate=0.1)
        assert transcript.completed, transcript.abort_reason
        assert transcript.plaintext == DATA
        for chunk in range(CHUNKS):
            assert_key_follows_payment(transcript, chunk)

    async def test_same_seed_same_transcript(self):
        first = await simulate(seed=42, drop_rate=0.3, dup_rate=0.2)
        second = await simulate(seed=42, drop_rate=0.3, dup_rate=0.2)
        assert first.lines() == second.lines()
        assert first.plaintext == second.plaintext

    async def test_gives_up_without_retries(self):
        transcript = await simulate(seed=0, drop_rate=0.9, max_retries=0)
        assert transcript.outcome == "Aborted"
        assert "timeout waiting for" in transcript.abort_reason


class TestAborts:
    """Tests for sessions that must stop before handing over a key."""

    async def test_tampered_ciphertext(self):
        """Test that a corrupted chunk is never paid for and never unlocked."""
        transcript = await simulate(tamper_chunks=(2,))
        assert transcript.outcome == "Aborted"
        assert transcript.abort_reason == "digest mismatch on chunk 2"
        assert transcript.index_of("verify", 2, "digest_mismatch") is not None
        assert transcript.index_of("key", 2, "sent") is None
        assert all(r.txn.txn_id != "session-2" for r in transcript.payments)

    async def test_declined_payment(self):
        backend = InMemoryPaymentBackend()
        backend.declined.add("receiver")
        transcript = await simulate(backend=backend)
        assert transcript.outcome == "Aborted"
        assert transcript.abort_reason.startswith("payment for chunk")
        assert not any(m.type == MessageType.KEY for m in transcript.messages)
        assert transcript.plaintext == b""

    async def test_abort_is_announced(self):
        transcript = await simulate(tamper_chunks=(0,))
        aborts = [m for m in transcript.messages if m.type == MessageType.ABORT]
        assert {m.recipient for m in aborts} == {Role.SENDER, Role.MEDIATOR}
        assert transcript.render().splitlines()[-1].startswith("outcome=Aborted reason=")
