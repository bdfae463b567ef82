"""Append-only security event log with replay and live subscriptions.

Every record answers what happened, when, where (which share), and who did
it. Records are line-delimited JSON in <data_dir>/events.log; the file is
only ever appended to, and a partially written trailing line left behind by
a crash is discarded on replay.
"""

from __future__ import annotations

import json
import logging
import os
import queue
import threading
from dataclasses import dataclass

from .util import rfc3339_now

logger = logging.getLogger(__name__)

# Event kinds ("what")
SHARE_ADDED = "share_added"
SHARE_REMOVED = "share_removed"
MODE_CHANGED = "mode_changed"
LIST = "list"
GET = "get"
PUT = "put"
DELETE = "delete"
PEER_JOINED = "peer_joined"
PEER_LEFT = "peer_left"
MALFORMED = "malformed"

#: Kinds recording a remote access attempt; their outcome is allowed/denied.
ACCESS_KINDS = frozenset({LIST, GET, PUT, DELETE})
#: Owner-initiated configuration acts; always outcome=info.
CONFIG_KINDS = frozenset({SHARE_ADDED, SHARE_REMOVED, MODE_CHANGED})
PEER_KINDS = frozenset({PEER_JOINED, PEER_LEFT})

# Outcomes
ALLOWED = "allowed"
DENIED = "denied"
INFO = "info"

#: "who" value for owner-initiated configuration acts.
LOCAL_ACTOR = "local"

#: Pending records a subscriber may fall behind by before it is dropped.
MAX_SUBSCRIBER_BACKLOG = 4096


@dataclass(frozen=True)
class EventRecord:
    """One security-relevant occurrence. seq is assigned by the log."""

    seq: int
    when: str
    what: str
    outcome: str
    share_id: str = ""
    share_name: str = ""
    peer_id: str = ""
    peer_name: str = ""
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "seq": self.seq,
            "when": self.when,
            "what": self.what,
            "outcome": self.outcome,
            "share_id": self.share_id,
            "share_name": self.share_name,
            "peer_id": self.peer_id,
            "peer_name": self.peer_name,
            "detail": self.detail,
        }

    def to_line(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"), ensure_ascii=False) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "EventRecord":
        return cls(
            seq=int(data["seq"]),
            when=str(data["when"]),
            what=str(data["what"]),
            outcome=str(data["outcome"]),
            share_id=str(data.get("share_id", "")),
            share_name=str(data.get("share_name", "")),
            peer_id=str(data.get("peer_id", "")),
            peer_name=str(data.get("peer_name", "")),
            detail=str(data.get("detail", "")),
        )


class Subscription:
    """Ordered, lossless feed of records for one consumer.

    A subscriber that falls more than MAX_SUBSCRIBER_BACKLOG records behind
    is dropped (``dropped`` set) instead of back-pressuring the daemon; it
    is expected to resubscribe with its last seen seq.
    """

    def __init__(self) -> None:
        self._queue: queue.Queue = queue.Queue()
        self.dropped = False
        self.closed = False

    def _offer(self, record: EventRecord | None) -> bool:
        if record is not None and self._queue.qsize() >= MAX_SUBSCRIBER_BACKLOG:
            return False
        self._queue.put_nowait(record)
        return True

    def get(self, timeout: float | None = None) -> EventRecord | None:
        """Next record, or None on timeout / wake-up after close."""
        try:
            return self._queue.get(timeout=timeout)
        except queue.Empty:
            return None

    @property
    def live(self) -> bool:
        return not (self.dropped or self.closed)


class EventLog:
    """Durable, strictly ordered event log backing the dashboard feed.

    Appends are serialized; seq starts at 1 and never repeats or gaps
    within one log file. A failed disk write degrades auditing (flag set,
    warning logged) but never fails the operation that caused the event.
    """

    def __init__(self, path: str | os.PathLike) -> None:
        self._path = str(path)
        self._lock = threading.Lock()
        self._records: list[EventRecord] = []
        self._subs: list[Subscription] = []
        self._next_seq = 1
        self.degraded = False
        self._replay()
        self._fh = open(self._path, "ab")

    # ── persistence ──────────────────────────────────────────────

    def _replay(self) -> None:
        if not os.path.exists(self._path):
            return
        with open(self._path, "rb") as f:
            buf = f.read()
        offset = 0
        while True:
            nl = buf.find(b"\n", offset)
            if nl < 0:
                break
            line = buf[offset:nl]
            try:
                record = EventRecord.from_dict(json.loads(line.decode("utf-8")))
            except (ValueError, KeyError, UnicodeDecodeError):
                logger.warning("event log %s: corrupt record at byte %d, discarding rest",
                               self._path, offset)
                break
            self._records.append(record)
            offset = nl + 1
        if offset < len(buf):
            logger.warning("event log %s: discarding %d bytes of partial trailing data",
                           self._path, len(buf) - offset)
            with open(self._path, "r+b") as f:
                f.truncate(offset)
        if self._records:
            self._next_seq = self._records[-1].seq + 1

    # ── core API ─────────────────────────────────────────────────

    def append(self, what: str, outcome: str, *, share_id: str = "", share_name: str = "",
               peer_id: str = "", peer_name: str = "", detail: str = "") -> EventRecord:
        """Assign the next seq, persist the record, fan out to subscribers."""
        with self._lock:
            record = EventRecord(
                seq=self._next_seq,
                when=rfc3339_now(),
                what=what,
                outcome=outcome,
                share_id=share_id,
                share_name=share_name,
                peer_id=peer_id,
                peer_name=peer_name,
                detail=detail,
            )
            self._next_seq += 1
            self._records.append(record)
            try:
                self._fh.write(record.to_line().encode("utf-8"))
                self._fh.flush()
                os.fsync(self._fh.fileno())
            except (OSError, ValueError) as exc:
                if not self.degraded:
                    logger.warning("event log write failed, auditing degraded: %s", exc)
                self.degraded = True
            dead = [sub for sub in self._subs if not sub._offer(record)]
            for sub in dead:
                sub.dropped = True
                self._subs.remove(sub)
            return record

    def read(self, since_seq: int = 0, *, what: str | None = None,
             outcome: str | None = None, share_id: str | None = None,
             peer_id: str | None = None, limit: int | None = None) -> list[EventRecord]:
        """Matching records with seq > since_seq, in seq order, at most limit."""
        with self._lock:
            snapshot = list(self._records)
        out: list[EventRecord] = []
        for record in snapshot:
            if record.seq <= since_seq:
                continue
            if what is not None and record.what != what:
                continue
            if outcome is not None and record.outcome != outcome:
                continue
            if share_id is not None and record.share_id != share_id:
                continue
            if peer_id is not None and record.peer_id != peer_id:
                continue
            out.append(record)
            if limit is not None and len(out) >= limit:
                break
        return out

    def subscribe(self, since_seq: int = 0) -> Subscription:
        """Receive every record with seq > since_seq, in order, without loss."""
        sub = Subscription()
        with self._lock:
            for record in self._records:
                if record.seq > since_seq:
                    sub._queue.put_nowait(record)
            self._subs.append(sub)
        return sub

    def unsubscribe(self, sub: Subscription) -> None:
        with self._lock:
            if sub in self._subs:
                self._subs.remove(sub)
        sub.closed = True

    @property
    def count(self) -> int:
        with self._lock:
            return len(self._records)

    @property
    def last_seq(self) -> int:
        with self._lock:
            return self._records[-1].seq if self._records else 0

    def close(self) -> None:
        with self._lock:
            subs = list(self._subs)
            self._subs.clear()
            try:
                self._fh.close()
            except OSError:
                pass
        for sub in subs:
            sub.closed = True
            sub._queue.put_nowait(None)
