"""
Metering and billing: usage windows, invoices, revenue splits, settlement
"""

from .invoicing import Invoice, InvoiceLine, load_pricing, make_invoice, parse_period
from .ledger import Ledger
from .settlement import (
    InMemoryPaymentBackend,
    PaymentBackend,
    PaymentStatus,
    PaymentTxn,
    Receipt,
    Settlement,
    settle,
)
from .splitting import credits_by_beneficiary, split_payment
from .tracker import UsageTracker, certified_reporters, load_usage_log

__all__ = [
    "InMemoryPaymentBackend",
    "Invoice",
    "InvoiceLine",
    "Ledger",
    "PaymentBackend",
    "PaymentStatus",
    "PaymentTxn",
    "Receipt",
    "Settlement",
    "UsageTracker",
    "certified_reporters",
    "credits_by_beneficiary",
    "load_pricing",
    "load_usage_log",
    "make_invoice",
    "parse_period",
    "settle",
    "split_payment",
]
