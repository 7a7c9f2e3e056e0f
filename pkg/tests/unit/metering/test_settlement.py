"""Unit tests for payment settlement and the ledger."""
import pytest
from pydantic import ValidationError

from agora.errors import BackendUnavailable, InvalidTransition
from agora.metering import (
    InMemoryPaymentBackend,
    Ledger,
    PaymentStatus,
    PaymentTxn,
    Settlement,
    settle,
)
from agora.models.money import Money
from tests.factories import PaymentTxnFactory


class FakeSleep:
    def __init__(self):
        self.delays = []

    async def __call__(self, delay):
        self.delays.append(delay)


class FlakyConfirmBackend(InMemoryPaymentBackend):
    """Executes fine but cannot be reached for the first `outages` confirmations"""

    def __init__(self, outages):
        super().__init__()
        self.outages = outages
        self.confirms = 0

    async def confirm(self, reference):
        self.confirms += 1
        if self.confirms <= self.outages:
            raise BackendUnavailable(f"confirm {self.confirms} timed out")
        return await super().confirm(reference)


@pytest.fixture
def ledger():
    ledger = Ledger()
    yield ledger
    ledger.close()


class TestSettlement:
    """Tests for retries, backoff and terminal statuses."""

    async def test_confirms_first_try(self, ledger):
        backend = InMemoryPaymentBackend()
        txn = PaymentTxnFactory(payer="alice", payee="ml-hub", amount=Money.of("2.50"))
        (receipt,) = await settle([txn], backend, ledger)
        assert receipt.status == PaymentStatus.CONFIRMED
        assert (receipt.attempts, receipt.error) == (1, None)
        assert receipt.reference == f"ref-{txn.txn_id}"
        assert backend.balances == {"alice": -2_500_000, "ml-hub": 2_500_000}
        assert ledger.status(txn.txn_id) == PaymentStatus.CONFIRMED

    async def test_transient_failures_back_off(self):
        """Test that two refusals are retried after 50ms then 100ms."""
        sleep = FakeSleep()
        backend = InMemoryPaymentBackend(failures_before_success=2)
        receipt = await Settlement(backend, sleep=sleep).settle_one(PaymentTxnFactory())
        assert receipt.status == PaymentStatus.CONFIRMED
        assert receipt.attempts == 3
        assert sleep.delays == [0.05, 0.1]

    async def test_gives_up_after_attempts(self, ledger):
        sleep = FakeSleep()
        backend = InMemoryPaymentBackend(always_fail=True)
        txn = PaymentTxnFactory()
        receipt = await Settlement(backend, ledger, sleep=sleep).settle_one(txn)
        assert receipt.status == PaymentStatus.FAILED
        assert receipt.attempts == 3
        assert "refused" in receipt.error
        assert backend.calls == 3
        assert len(sleep.delays) == 2
        assert ledger.status(txn.txn_id) == PaymentStatus.FAILED

    async def test_confirm_outage_is_retried(self, ledger):
        """Test that a lost confirmation is retried without executing again."""
        sleep = FakeSleep()
        backend = FlakyConfirmBackend(outages=1)
        txn = PaymentTxnFactory(payer="alice", payee="bob", amount=Money.of("1"))
        receipt = await Settlement(backend, ledger, sleep=sleep).settle_one(txn)
        assert receipt.status == PaymentStatus.CONFIRMED
        assert (receipt.attempts, backend.calls, backend.confirms) == (2, 1, 2)
        assert sleep.delays == [0.05]
        assert backend.balances == {"alice": -1_000_000, "bob": 1_000_000}

    async def test_confirm_never_answers(self, ledger):
        """Test that a transaction whose confirmation keeps failing ends Failed, not Pending."""
        backend = FlakyConfirmBackend(outages=3)
        txn = PaymentTxnFactory()
        receipt = await Settlement(backend, ledger, sleep=FakeSleep()).settle_one(txn)
        assert receipt.status == PaymentStatus.FAILED
        assert receipt.error == "confirm 3 timed out"
        assert receipt.reference == f"ref-{txn.txn_id}"
        assert backend.calls == 1
        assert ledger.status(txn.txn_id) == PaymentStatus.FAILED

    async def test_declined_payer(self):
        backend = InMemoryPaymentBackend()
        backend.declined.add("mallory")
        (receipt,) = await settle([PaymentTxnFactory(payer="mallory")], backend)
        assert receipt.status == PaymentStatus.FAILED
        assert receipt.error == "declined"
        assert backend.balances == {}

    async def test_settles_in_order(self, ledger):
        txns = [PaymentTxnFactory(payer="alice", payee=p) for p in ("bob", "carol", "dave")]
        receipts = await settle(txns, InMemoryPaymentBackend(), ledger)
        assert [r.txn.payee for r in receipts] == ["bob", "carol", "dave"]
        assert ledger.balance("alice") == Money.of("-0.03")

    def test_backoff_is_capped(self):
        settlement = Settlement(InMemoryPaymentBackend(), base_backoff_s=0.25, max_backoff_s=1.0)
        assert [settlement.backoff(a) for a in range(1, 6)] == [0.25, 0.5, 1.0, 1.0, 1.0]


class TestPaymentTxn:
    """Tests for the pending-to-terminal state machine."""

    @pytest.mark.parametrize("status", [PaymentStatus.CONFIRMED, PaymentStatus.FAILED])
    def test_pending_moves_to_terminal(self, status):
        assert PaymentTxnFactory().transition(status).status == status

    def test_terminal_never_moves(self):
        confirmed = PaymentTxnFactory().transition(PaymentStatus.CONFIRMED)
        with pytest.raises(InvalidTransition) as excinfo:
            confirmed.transition(PaymentStatus.FAILED)
        assert excinfo.value.transition == ("confirmed", "failed")

    def test_back_to_pending_is_refused(self):
        with pytest.raises(InvalidTransition):
            PaymentTxnFactory().transition(PaymentStatus.PENDING)

    @pytest.mark.parametrize("amount", ["0", "-1"])
    def test_amount_must_be_positive(self, amount):
        with pytest.raises(ValidationError):
            PaymentTxn(txn_id="t", payer="a", payee="b", amount=Money.of(amount))


class TestLedger:
    """Tests for the durable payment log."""

    def test_record_is_idempotent(self, ledger):
        txn = PaymentTxnFactory()
        ledger.record(txn)
        ledger.record(txn)
        assert ledger.history() == [txn]
        assert ledger.status(txn.txn_id) == PaymentStatus.PENDING

    def test_finalize_twice(self, ledger):
        """Test that a terminal status is never overwritten."""
        txn = PaymentTxnFactory()
        ledger.record(txn)
        ledger.finalize(txn.transition(PaymentStatus.FAILED))
        with pytest.raises(InvalidTransition):
            ledger.finalize(txn.transition(PaymentStatus.CONFIRMED))
        assert ledger.status(txn.txn_id) == PaymentStatus.FAILED

    def test_balances_count_confirmed_only(self, ledger):
        paid = PaymentTxnFactory(payer="alice", payee="bob", amount=Money.of("1"))
        failed = PaymentTxnFactory(payer="alice", payee="bob", amount=Money.of("5"))
        ledger.finalize(paid.transition(PaymentStatus.CONFIRMED))
        ledger.finalize(failed.transition(PaymentStatus.FAILED))
        assert ledger.balances() == {"alice": Money.of("-1"), "bob": Money.of("1")}
        assert ledger.balance("nobody") == Money.zero()

    def test_unknown_txn(self, ledger):
        assert ledger.status("missing") is None

    def test_file_backed_ledger_persists(self, tmp_path):
        url = f"sqlite:///{tmp_path / 'ledger.db'}"
        txn = PaymentTxnFactory()
        first = Ledger(url)
        first.record(txn)
        first.close()
        reopened = Ledger(url)
        assert reopened.history() == [txn]
        reopened.close()
