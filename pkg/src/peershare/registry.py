"""Shared-file registry and the three-level permission lattice.

A file is shared at exactly one of three modes, strictly ordered
read < write < full. Each mode grants a superset of the previous:

    read   - peers may list the share and copy the file
    write  - read, plus replacing the file's content
    full   - write, plus deleting the file from this machine

``authorize`` is the single enforcement decision the wire server consults;
there is no other path to a shared file.
"""

from __future__ import annotations

import enum
import functools
import json
import logging
import os
import threading
from dataclasses import dataclass, replace
from datetime import datetime, timezone

from . import events
from .events import EventLog
from .util import atomic_write_text, rfc3339_from, rfc3339_now

logger = logging.getLogger(__name__)


@functools.total_ordering
class PermissionMode(enum.Enum):
    READ = "read"
    WRITE = "write"
    FULL = "full"

    def __lt__(self, other: "PermissionMode") -> bool:
        if not isinstance(other, PermissionMode):
            return NotImplemented
        return _MODE_RANK[self] < _MODE_RANK[other]

    @classmethod
    def parse(cls, value: str) -> "PermissionMode":
        try:
            return cls(value)
        except ValueError:
            raise ValueError(f"unknown mode {value!r}; expected one of read, write, full")


_MODE_RANK = {PermissionMode.READ: 0, PermissionMode.WRITE: 1, PermissionMode.FULL: 2}


class Action(enum.Enum):
    LIST = "list"
    GET = "get"
    PUT = "put"
    DELETE = "delete"


#: Actions that change state on the owner's machine.
MUTATING_ACTIONS = frozenset({Action.PUT, Action.DELETE})

#: The allowed-action sets. Strictly nested: read ⊂ write ⊂ full.
ALLOWED_ACTIONS: dict[PermissionMode, frozenset[Action]] = {
    PermissionMode.READ: frozenset({Action.LIST, Action.GET}),
    PermissionMode.WRITE: frozenset({Action.LIST, Action.GET, Action.PUT}),
    PermissionMode.FULL: frozenset({Action.LIST, Action.GET, Action.PUT, Action.DELETE}),
}


def authorize(action: Action, mode: PermissionMode) -> bool:
    """Allow iff *action* is in the allowed set of *mode*. Pure, no side effects."""
    return action in ALLOWED_ACTIONS[mode]


class RegistryError(Exception):
    """Base for share registry failures."""


class PathNotFound(RegistryError):
    pass


class NotAFile(RegistryError):
    pass


class AlreadyShared(RegistryError):
    pass


class UnknownShare(RegistryError):
    pass


@dataclass(frozen=True)
class ShareEntry:
    """A locally owned file exposed to the LAN. Timestamps are RFC 3339 UTC."""

    share_id: str
    path: str
    display_name: str
    mode: PermissionMode
    size_bytes: int
    created_at: str
    modified_at: str

    def to_dict(self) -> dict:
        return {
            "share_id": self.share_id,
            "path": self.path,
            "display_name": self.display_name,
            "mode": self.mode.value,
            "size_bytes": self.size_bytes,
            "created_at": self.created_at,
            "modified_at": self.modified_at,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShareEntry":
        return cls(
            share_id=str(data["share_id"]),
            path=str(data["path"]),
            display_name=str(data["display_name"]),
            mode=PermissionMode(data["mode"]),
            size_bytes=int(data["size_bytes"]),
            created_at=str(data["created_at"]),
            modified_at=str(data["modified_at"]),
        )


def new_share_id() -> str:
    """128-bit random identifier as lowercase hex. Never derived from the path."""
    return os.urandom(16).hex()


class ShareRegistry:
    """Owns the set of shared files and every authorization decision.

    All mutations are serialized, persisted atomically to shares.json, and
    emit exactly one event. Mutations driven by a served remote request
    (apply_remote_*) do not emit here: the wire server records the single
    access event for that request instead.
    """

    def __init__(self, store_path: str | os.PathLike, event_log: EventLog) -> None:
        self._store_path = str(store_path)
        self._log = event_log
        self._lock = threading.RLock()
        self._entries: dict[str, ShareEntry] = {}
        self._load()

    # ── owner operations ─────────────────────────────────────────

    def add_share(self, path: str | os.PathLike, mode: PermissionMode = PermissionMode.READ) -> ShareEntry:
        """Share *path* at *mode* (default read, the least-capable mode)."""
        resolved = os.path.realpath(str(path))
        with self._lock:
            if not os.path.exists(resolved):
                raise PathNotFound(f"no such file: {resolved}")
            if not os.path.isfile(resolved):
                raise NotAFile(f"not a regular file: {resolved}")
            for entry in self._entries.values():
                if entry.path == resolved:
                    raise AlreadyShared(f"already shared as {entry.share_id}: {resolved}")
            stat = os.stat(resolved)
            entry = ShareEntry(
                share_id=new_share_id(),
                path=resolved,
                display_name=os.path.basename(resolved),
                mode=mode,
                size_bytes=stat.st_size,
                created_at=rfc3339_now(),
                modified_at=rfc3339_from(datetime.fromtimestamp(stat.st_mtime, tz=timezone.utc)),
            )
            self._entries[entry.share_id] = entry
            self._persist()
            self._log.append(
                events.SHARE_ADDED, events.INFO,
                share_id=entry.share_id, share_name=entry.display_name,
                peer_id=events.LOCAL_ACTOR, peer_name=events.LOCAL_ACTOR,
                detail=f"mode {mode.value}",
            )
            return entry

    def set_mode(self, share_id: str, mode: PermissionMode) -> ShareEntry:
        """Change a share's mode. Setting the same mode is still an auditable act."""
        with self._lock:
            old = self._require(share_id)
            entry = replace(old, mode=mode)
            self._entries[share_id] = entry
            self._persist()
            self._log.append(
                events.MODE_CHANGED, events.INFO,
                share_id=entry.share_id, share_name=entry.display_name,
                peer_id=events.LOCAL_ACTOR, peer_name=events.LOCAL_ACTOR,
                detail=f"mode {old.mode.value}→{mode.value}",
            )
            return entry

    def remove_share(self, share_id: str) -> ShareEntry:
        """Stop sharing. The local file is not touched."""
        with self._lock:
            entry = self._require(share_id)
            del self._entries[share_id]
            self._persist()
            self._log.append(
                events.SHARE_REMOVED, events.INFO,
                share_id=entry.share_id, share_name=entry.display_name,
                peer_id=events.LOCAL_ACTOR, peer_name=events.LOCAL_ACTOR,
            )
            return entry

    # ── reads ────────────────────────────────────────────────────

    def list_shares(self) -> list[ShareEntry]:
        """Snapshot of all entries, ordered by creation time then share_id."""
        with self._lock:
            return sorted(self._entries.values(), key=lambda e: (e.created_at, e.share_id))

    def get(self, share_id: str) -> ShareEntry | None:
        with self._lock:
            return self._entries.get(share_id)

    @property
    def count(self) -> int:
        with self._lock:
            return len(self._entries)

    # ── mutations driven by served remote requests ───────────────

    def apply_remote_put(self, share_id: str, size_bytes: int) -> ShareEntry:
        """Record that a served put replaced the file content."""
        with self._lock:
            old = self._require(share_id)
            entry = replace(old, size_bytes=size_bytes, modified_at=rfc3339_now())
            self._entries[share_id] = entry
            self._persist()
            return entry

    def apply_remote_delete(self, share_id: str) -> ShareEntry:
        """Drop the entry after a served delete removed the file."""
        with self._lock:
            entry = self._require(share_id)
            del self._entries[share_id]
            self._persist()
            return entry

    # ── persistence ──────────────────────────────────────────────

    def _require(self, share_id: str) -> ShareEntry:
        entry = self._entries.get(share_id)
        if entry is None:
            raise UnknownShare(f"unknown share: {share_id}")
        return entry

    def _persist(self) -> None:
        doc = [e.to_dict() for e in sorted(self._entries.values(),
                                           key=lambda e: (e.created_at, e.share_id))]
        atomic_write_text(self._store_path, json.dumps(doc, indent=2, ensure_ascii=False) + "\n")

    def _load(self) -> None:
        if not os.path.exists(self._store_path):
            return
        try:
            with open(self._store_path, "r", encoding="utf-8") as f:
                doc = json.load(f)
            for item in doc:
                entry = ShareEntry.from_dict(item)
                self._entries[entry.share_id] = entry
        except (ValueError, KeyError) as exc:
            logger.error("could not load %s: %s (starting with empty registry)",
                         self._store_path, exc)
            self._entries.clear()
