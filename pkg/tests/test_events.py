"""Event log: seq discipline, filters, replay, append-only, subscriptions."""

from __future__ import annotations

import hashlib
import json
import threading

import pytest

from peershare import events
from peershare.events import EventLog, EventRecord


def append_n(log: EventLog, n: int, **kwargs) -> list[EventRecord]:
    return [log.append(events.GET, events.ALLOWED, peer_id="p1", peer_name="peer",
                       share_id=f"s{i}", **kwargs) for i in range(n)]


class TestAppend:
    def test_first_seq_is_one(self, event_log):
        assert event_log.append(events.LIST, events.ALLOWED).seq == 1

    def test_strictly_increasing(self, event_log):
        records = append_n(event_log, 5)
        assert [r.seq for r in records] == [1, 2, 3, 4, 5]

    def test_when_is_rfc3339(self, event_log):
        from peershare.util import parse_rfc3339
        record = event_log.append(events.GET, events.DENIED)
        assert parse_rfc3339(record.when).tzinfo is not None

    def test_line_format_exact_field_names(self, event_log, tmp_path):
        event_log.append(events.GET, events.ALLOWED, share_id="s1", share_name="f.txt",
                         peer_id="p1", peer_name="bob", detail="42 bytes")
        line = (tmp_path / "events.log").read_text().splitlines()[0]
        doc = json.loads(line)
        assert list(doc) == ["seq", "when", "what", "outcome", "share_id",
                             "share_name", "peer_id", "peer_name", "detail"]
        assert doc["what"] == "get" and doc["outcome"] == "allowed"
        assert doc["peer_name"] == "bob"


class TestRead:
    def test_full_log_in_order(self, event_log):
        append_n(event_log, 7)
        assert [r.seq for r in event_log.read(0)] == list(range(1, 8))

    def test_since_excludes_boundary(self, event_log):
        append_n(event_log, 7)
        assert [r.seq for r in event_log.read(5)] == [6, 7]

    def test_outcome_filter(self, event_log):
        for _ in range(3):
            event_log.append(events.PUT, events.DENIED, peer_id="p")
        for _ in range(2):
            event_log.append(events.PUT, events.ALLOWED, peer_id="p")
        denied = event_log.read(outcome=events.DENIED)
        assert len(denied) == 3
        assert all(r.outcome == events.DENIED for r in denied)

    def test_filters_combine(self, event_log):
        event_log.append(events.GET, events.ALLOWED, share_id="a", peer_id="p1")
        event_log.append(events.GET, events.ALLOWED, share_id="b", peer_id="p1")
        event_log.append(events.PUT, events.DENIED, share_id="a", peer_id="p2")
        out = event_log.read(what=events.GET, share_id="a")
        assert len(out) == 1 and out[0].seq == 1
        assert len(event_log.read(peer_id="p2")) == 1

    def test_limit(self, event_log):
        append_n(event_log, 10)
        assert [r.seq for r in event_log.read(0, limit=3)] == [1, 2, 3]


class TestReplay:
    def test_clean_restart_identical(self, tmp_path):
        path = tmp_path / "events.log"
        log = EventLog(path)
        original = append_n(log, 5)
        log.close()
        reopened = EventLog(path)
        assert reopened.read(0) == original
        assert reopened.append(events.LIST, events.ALLOWED).seq == 6
        reopened.close()

    def test_truncated_trailing_line_discarded(self, tmp_path):
        path = tmp_path / "events.log"
        log = EventLog(path)
        append_n(log, 3)
        log.close()
        with open(path, "ab") as f:
            f.write(b'{"seq":4,"when":"2026-01-01T0')  # crash mid-write
        reopened = EventLog(path)
        assert [r.seq for r in reopened.read(0)] == [1, 2, 3]
        assert reopened.append(events.LIST, events.ALLOWED).seq == 4
        reopened.close()
        # the repaired file must itself replay cleanly
        again = EventLog(path)
        assert [r.seq for r in again.read(0)] == [1, 2, 3, 4]
        again.close()

    def test_empty_file(self, tmp_path):
        path = tmp_path / "events.log"
        path.touch()
        log = EventLog(path)
        assert log.read(0) == []
        assert log.append(events.LIST, events.ALLOWED).seq == 1
        log.close()


class TestAppendOnly:
    def test_prefix_digest_stable_under_later_activity(self, tmp_path):
        path = tmp_path / "events.log"
        log = EventLog(path)
        append_n(log, 10)
        prefix_lines = path.read_bytes().splitlines(keepends=True)[:10]
        digest_before = hashlib.sha256(b"".join(prefix_lines)).hexdigest()
        append_n(log, 25)
        log.append(events.SHARE_REMOVED, events.INFO, share_id="s0")
        after_lines = path.read_bytes().splitlines(keepends=True)[:10]
        assert hashlib.sha256(b"".join(after_lines)).hexdigest() == digest_before
        log.close()


class TestSubscriptions:
    def test_history_then_live_in_order(self, event_log):
        append_n(event_log, 3)
        sub = event_log.subscribe(since_seq=0)
        append_n(event_log, 2)
        got = [sub.get(timeout=1).seq for _ in range(5)]
        assert got == [1, 2, 3, 4, 5]

    def test_since_skips_history(self, event_log):
        append_n(event_log, 4)
        sub = event_log.subscribe(since_seq=3)
        assert sub.get(timeout=1).seq == 4
        assert sub.get(timeout=0.05) is None

    def test_two_subscribers_see_identical_sequences(self, event_log):
        sub1 = event_log.subscribe()
        sub2 = event_log.subscribe()
        append_n(event_log, 6)
        seen1 = [sub1.get(timeout=1).seq for _ in range(6)]
        seen2 = [sub2.get(timeout=1).seq for _ in range(6)]
        assert seen1 == seen2 == list(range(1, 7))

    def test_concurrent_appends_no_loss_no_dupes(self, event_log):
        sub = event_log.subscribe()
        n_threads, per_thread = 4, 25
        threads = [threading.Thread(target=lambda: append_n(event_log, per_thread))
                   for _ in range(n_threads)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        total = n_threads * per_thread
        seqs = [sub.get(timeout=1).seq for _ in range(total)]
        assert seqs == sorted(seqs)
        assert len(set(seqs)) == total

    def test_slow_subscriber_dropped_not_blocking(self, event_log, monkeypatch):
        monkeypatch.setattr(events, "MAX_SUBSCRIBER_BACKLOG", 5)
        slow = event_log.subscribe()
        append_n(event_log, 10)  # never consumed
        assert slow.dropped
        assert not slow.live
        # the log itself keeps going and a fresh subscriber catches up via since
        fresh = event_log.subscribe(since_seq=8)
        assert [fresh.get(timeout=1).seq, fresh.get(timeout=1).seq] == [9, 10]

    def test_close_wakes_subscribers(self, event_log):
        sub = event_log.subscribe()
        waker = threading.Thread(target=event_log.close)
        waker.start()
        assert sub.get(timeout=2) is None
        waker.join()
        assert sub.closed


class TestRecord:
    def test_dict_round_trip(self):
        record = EventRecord(seq=3, when="2026-08-09T10:00:00Z", what="put",
                             outcome="denied", share_id="s", share_name="f.bin",
                             peer_id="p", peer_name="bob", detail="mode read")
        assert EventRecord.from_dict(record.to_dict()) == record

    def test_line_round_trip(self):
        record = EventRecord(seq=1, when="2026-08-09T10:00:00Z", what="mode_changed",
                             outcome="info", detail="mode read→full")
        assert EventRecord.from_dict(json.loads(record.to_line())) == record
