"""
Usage tracking
Events are pre-aggregated into tumbling windows and propagated as counters
once a window closes.
"""

import threading
from collections import defaultdict
from typing import Callable, Dict, Iterable, List, Optional, Set, Tuple

import structlog
from prometheus_client import CollectorRegistry, Counter, generate_latest

from agora.assets.codec import read_documents
from agora.errors import LateEvent, UntrustedNode
from agora.execution.certificates import AuthorityRegistry, verify_certificates
from agora.execution.nodes import NodeExecutorInfo
from agora.models.assets import CertificateRequirement
from agora.models.usage import AggregatedCounter, UsageEvent, UsageMetric

logger = structlog.get_logger(__name__)

USAGE_TRACKING = "usage-tracking"

NodeVerifier = Callable[[str], bool]
WindowKey = Tuple[int, str, UsageMetric]


class UsageTracker:
    """Tumbling-window usage aggregator; safe to call from many threads."""

    def __init__(self, window_s: int = 60, node_verifier: Optional[NodeVerifier] = None):
        if window_s <= 0:
            raise ValueError("window_s must be positive")
        self.window_s = window_s
        self.node_verifier = node_verifier
        self._open: Dict[WindowKey, int] = defaultdict(int)
        self._seen: Set[str] = set()
        self._watermark: Optional[int] = None
        self._lock = threading.Lock()
        self.late_events: List[UsageEvent] = []

        self.metrics = CollectorRegistry()
        self._accepted = Counter(
            "agora_usage_events_accepted",
            "Usage events accepted into a window",
            ["metric"],
            registry=self.metrics,
        )
        self._late = Counter(
            "agora_usage_events_late", "Usage events rejected as late", registry=self.metrics
        )
        self._duplicates = Counter(
            "agora_usage_events_duplicate",
            "Usage events ignored as re-deliveries",
            registry=self.metrics,
        )
        self._untrusted = Counter(
            "agora_usage_events_untrusted",
            "Usage events rejected from uncertified nodes",
            ["node"],
            registry=self.metrics,
        )

    @property
    def watermark(self) -> Optional[int]:
        """Start of the oldest window still open, once anything was flushed."""
        return self._watermark

    def window_of(self, at: int) -> int:
        return at - at % self.window_s

    def track(self, event: UsageEvent) -> bool:
        """Add an event to its window; False when it is a re-delivery.

        Raises LateEvent for timestamps in an already flushed window and
        UntrustedNode when a verifier is installed and rejects the reporter.
        """
        with self._lock:
            if event.event_id is not None and event.event_id in self._seen:
                self._duplicates.inc()
                return False
            if self.node_verifier is not None and not self.node_verifier(event.node):
                self._untrusted.labels(node=event.node).inc()
                raise UntrustedNode(event.node)
            start = self.window_of(event.at)
            if self._watermark is not None and start < self._watermark:
                self._late.inc()
                self.late_events.append(event)
                logger.warning(
                    "late_usage_event",
                    event_id=event.event_id,
                    at=event.at,
                    watermark=self._watermark,
                )
                raise LateEvent(event.event_id, event.at, self._watermark)
            self._open[(start, event.asset, event.metric)] += event.amount
            if event.event_id is not None:
                self._seen.add(event.event_id)
            self._accepted.labels(metric=event.metric.value).inc()
            return True

    def track_all(self, events: Iterable[UsageEvent]) -> int:
        """Track a stream, counting late and untrusted events instead of raising.

        Returns the number accepted.
        """
        accepted = 0
        for event in events:
            try:
                accepted += self.track(event)
            except (LateEvent, UntrustedNode):
                continue
        return accepted

    def flush_window(self, now: int) -> List[AggregatedCounter]:
        """Counters of every window that closed by `now`, each emitted once."""
        with self._lock:
            closed = sorted(k for k in self._open if k[0] + self.window_s <= now)
            counters = [
                AggregatedCounter(
                    window_start=start,
                    window_end=start + self.window_s,
                    asset=asset,
                    metric=metric,
                    total=self._open.pop((start, asset, metric)),
                )
                for start, asset, metric in closed
            ]
            boundary = self.window_of(now)
            if self._watermark is None or boundary > self._watermark:
                self._watermark = boundary
        if counters:
            logger.debug("windows_flushed", counters=len(counters), watermark=boundary)
        return counters

    def pending(self) -> int:
        with self._lock:
            return len(self._open)

    def metrics_text(self) -> str:
        return generate_latest(self.metrics).decode("utf-8")


def certified_reporters(
    nodes: Iterable[NodeExecutorInfo],
    registry: AuthorityRegistry,
    now: int,
    trusted_authorities: Iterable[str],
) -> NodeVerifier:
    """Verifier accepting only nodes holding a valid usage-tracking certificate."""
    by_id = {n.node_id: n for n in nodes}
    requirement = CertificateRequirement(
        property=USAGE_TRACKING, trusted_authorities=tuple(trusted_authorities)
    )

    def verify(node_id: str) -> bool:
        node = by_id.get(node_id)
        return node is not None and verify_certificates(node, [requirement], now, registry)

    return verify


def load_usage_log(path: str) -> List[UsageEvent]:
    return read_documents(path, UsageEvent)
