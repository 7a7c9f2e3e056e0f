"""
Settlement ledger
A durable log of payment transactions; terminal statuses are never
overwritten.
"""

from typing import Dict, List, Optional

from sqlalchemy import (
    BigInteger,
    Column,
    Connection,
    MetaData,
    String,
    Table,
    create_engine,
    insert,
    select,
    update,
)
from sqlalchemy.pool import StaticPool

from agora.errors import InvalidTransition
from agora.models.money import Money

from .settlement import PaymentStatus, PaymentTxn

metadata = MetaData()

payment_txns = Table(
    "payment_txns",
    metadata,
    Column("txn_id", String(128), primary_key=True),
    Column("payer", String(128), nullable=False),
    Column("payee", String(128), nullable=False),
    Column("amount", BigInteger, nullable=False),
    Column("status", String(16), nullable=False),
)


class Ledger:
    """Payment log on a SQLAlchemy engine"""

    def __init__(self, url: str = "sqlite://"):
        options = {}
        if url in ("sqlite://", "sqlite:///:memory:"):
            # one shared connection so the in-memory database outlives each checkout
            options = {"connect_args": {"check_same_thread": False}, "poolclass": StaticPool}
        self.engine = create_engine(url, **options)
        metadata.create_all(self.engine)

    def close(self) -> None:
        self.engine.dispose()

    @staticmethod
    def _insert(conn: Connection, txn: PaymentTxn) -> None:
        conn.execute(
            insert(payment_txns).values(
                txn_id=txn.txn_id,
                payer=txn.payer,
                payee=txn.payee,
                amount=txn.amount.micro_units,
                status=txn.status.value,
            )
        )

    def record(self, txn: PaymentTxn) -> None:
        """Log a txn as it enters settlement; re-recording a known txn is a no-op."""
        with self.engine.begin() as conn:
            known = conn.execute(
                select(payment_txns.c.txn_id).where(payment_txns.c.txn_id == txn.txn_id)
            ).first()
            if known is None:
                self._insert(conn, txn)

    def finalize(self, txn: PaymentTxn) -> None:
        with self.engine.begin() as conn:
            current = conn.execute(
                select(payment_txns.c.status).where(payment_txns.c.txn_id == txn.txn_id)
            ).scalar_one_or_none()
            if current is None:
                self._insert(conn, txn)
                return
            if current != PaymentStatus.PENDING.value:
                raise InvalidTransition(txn.txn_id, current, txn.status.value)
            conn.execute(
                update(payment_txns)
                .where(payment_txns.c.txn_id == txn.txn_id)
                .values(status=txn.status.value)
            )

    def status(self, txn_id: str) -> Optional[PaymentStatus]:
        with self.engine.connect() as conn:
            value = conn.execute(
                select(payment_txns.c.status).where(payment_txns.c.txn_id == txn_id)
            ).scalar_one_or_none()
        return PaymentStatus(value) if value is not None else None

    def history(self) -> List[PaymentTxn]:
        with self.engine.connect() as conn:
            rows = conn.execute(select(payment_txns).order_by(payment_txns.c.txn_id)).all()
        return [
            PaymentTxn(
                txn_id=r.txn_id,
                payer=r.payer,
                payee=r.payee,
                amount=Money.micro(r.amount),
                status=PaymentStatus(r.status),
            )
            for r in rows
        ]

    def balances(self) -> Dict[str, Money]:
        """Net movement per party over confirmed txns."""
        net: Dict[str, int] = {}
        for txn in self.history():
            if txn.status != PaymentStatus.CONFIRMED:
                continue
            net[txn.payer] = net.get(txn.payer, 0) - txn.amount.micro_units
            net[txn.payee] = net.get(txn.payee, 0) + txn.amount.micro_units
        return {party: Money.micro(v) for party, v in sorted(net.items())}

    def balance(self, party: str) -> Money:
        return self.balances().get(party, Money.zero())
