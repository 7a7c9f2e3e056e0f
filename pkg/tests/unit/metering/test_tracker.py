"""Unit tests for windowed usage tracking."""
import random
import threading

import pytest

from agora.errors import LateEvent, UntrustedNode
from agora.execution import NodeExecutorInfo, issue_certificate
from agora.metering import UsageTracker, certified_reporters, load_usage_log
from agora.models import PayPerUse, Region, UsageMetric, UsageUnit
from agora.models.money import Money
from tests.factories import UsageEventFactory
from tests.oracles import windowed_totals


class TestUsageTracker:
    """Tests for tumbling windows, re-deliveries and late events."""

    def test_one_counter_per_window(self):
        """Test that a minute of calls collapses into one counter."""
        tracker = UsageTracker(window_s=60)
        for i in range(1000):
            tracker.track(UsageEventFactory(at=i % 60))
        (counter,) = tracker.flush_window(60)
        assert (counter.window_start, counter.window_end, counter.total) == (0, 60, 1000)
        assert counter.metric == UsageMetric.CALLS

    def test_open_windows_stay_pending(self):
        tracker = UsageTracker(window_s=60)
        tracker.track(UsageEventFactory(at=59))
        tracker.track(UsageEventFactory(at=60))
        assert [c.window_start for c in tracker.flush_window(100)] == [0]
        assert tracker.pending() == 1
        assert [c.window_start for c in tracker.flush_window(120)] == [60]
        assert tracker.flush_window(120) == []

    def test_counters_split_by_asset_and_metric(self):
        tracker = UsageTracker(window_s=10)
        tracker.track(UsageEventFactory(asset="a", at=1))
        tracker.track(UsageEventFactory(asset="b", at=2))
        tracker.track(UsageEventFactory(asset="a", metric=UsageMetric.BYTES, amount=512, at=3))
        counters = tracker.flush_window(10)
        assert [(c.asset, c.metric.value, c.total) for c in counters] == [
            ("a", "bytes", 512),
            ("a", "calls", 1),
            ("b", "calls", 1),
        ]

    def test_redelivery_counts_once(self):
        tracker = UsageTracker()
        event = UsageEventFactory(event_id="once")
        assert tracker.track(event) is True
        assert tracker.track(event) is False
        assert tracker.flush_window(60)[0].total == 1

    def test_events_without_id_always_count(self):
        tracker = UsageTracker()
        event = UsageEventFactory(event_id=None, at=5)
        tracker.track(event)
        tracker.track(event)
        assert tracker.flush_window(60)[0].total == 2

    def test_late_event(self):
        """Test that an event for a flushed window is rejected, not merged."""
        tracker = UsageTracker(window_s=60)
        tracker.flush_window(120)
        assert tracker.watermark == 120
        with pytest.raises(LateEvent) as excinfo:
            tracker.track(UsageEventFactory(event_id="old", at=90))
        assert excinfo.value.watermark == 120
        assert [e.event_id for e in tracker.late_events] == ["old"]
        assert tracker.track(UsageEventFactory(at=120))

    def test_watermark_never_moves_back(self):
        tracker = UsageTracker(window_s=60)
        tracker.flush_window(600)
        tracker.flush_window(60)
        assert tracker.watermark == 600

    def test_track_all_skips_late(self):
        tracker = UsageTracker(window_s=60)
        tracker.flush_window(60)
        events = [UsageEventFactory(at=10), UsageEventFactory(at=70), UsageEventFactory(at=80)]
        assert tracker.track_all(events) == 2

    def test_concurrent_reporters(self):
        """Test that parallel nodes lose no counts."""
        tracker = UsageTracker(window_s=60)
        batches = [[UsageEventFactory(at=i % 60) for i in range(250)] for _ in range(8)]
        threads = [threading.Thread(target=tracker.track_all, args=(b,)) for b in batches]
        for thread in threads:
            thread.start()
        for thread in threads:
            thread.join()
        assert tracker.flush_window(60)[0].total == 2000

    def test_metrics_text(self):
        tracker = UsageTracker(window_s=60)
        tracker.track(UsageEventFactory(event_id="x"))
        tracker.track(UsageEventFactory(event_id="x"))
        text = tracker.metrics_text()
        assert 'agora_usage_events_accepted_total{metric="calls"} 1.0' in text
        assert "agora_usage_events_duplicate_total 1.0" in text

    def test_window_must_be_positive(self):
        with pytest.raises(ValueError):
            UsageTracker(window_s=0)

    @pytest.mark.slow
    @pytest.mark.parametrize("seed", range(3))
    def test_matches_sort_and_sum(self, seed):
        """Test ten thousand shuffled events over ten windows, a tenth of them re-delivered."""
        rng = random.Random(seed)
        originals = [
            UsageEventFactory(
                asset=rng.choice(("forecaster", "crime-join", "elastic-net")),
                metric=rng.choice(list(UsageMetric)),
                amount=rng.randint(0, 10_000),
                at=rng.randrange(600),
            )
            for _ in range(9_000)
        ]
        events = originals + rng.choices(originals, k=1_000)
        rng.shuffle(events)
        tracker = UsageTracker(window_s=60)
        assert tracker.track_all(events) == 9_000
        counters = tracker.flush_window(600)
        assert len({c.window_start for c in counters}) == 10
        observed = sorted((c.window_start, c.asset, c.metric.value, c.total) for c in counters)
        assert observed == windowed_totals(events, 60)


class TestCertifiedReporters:
    """Tests for accepting usage only from certified nodes."""

    @pytest.fixture
    def tracker(self, authorities):
        certificate = issue_certificate(
            "eu-authority", "eu-secret", "node-eu", "usage-tracking", 10**6
        )
        nodes = [
            NodeExecutorInfo(
                node_id=node_id,
                region=Region.EU,
                certificates=certs,
                price=PayPerUse(rate=Money.zero(), metric=UsageUnit.PER_HOUR),
            )
            for node_id, certs in (("node-eu", (certificate,)), ("node-rogue", ()))
        ]
        verifier = certified_reporters(nodes, authorities, 0, ["eu-authority"])
        return UsageTracker(window_s=60, node_verifier=verifier)

    def test_certified_node_accepted(self, tracker):
        assert tracker.track(UsageEventFactory(node="node-eu"))

    @pytest.mark.parametrize("node", ["node-rogue", "node-unknown"])
    def test_uncertified_node_rejected(self, tracker, node):
        with pytest.raises(UntrustedNode):
            tracker.track(UsageEventFactory(node=node))
        assert tracker.pending() == 0


def test_load_usage_log(write_lines):
    events = [UsageEventFactory(), UsageEventFactory()]
    path = write_lines("usage.ndjson", [e.model_dump_json() for e in events])
    assert load_usage_log(str(path)) == events
