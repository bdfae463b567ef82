"""Daemon identity: a 128-bit peer id persisted per data directory."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .util import atomic_write_text


@dataclass(frozen=True)
class Identity:
    peer_id: str
    name: str


def new_peer_id() -> str:
    return os.urandom(16).hex()


def load_or_create_peer_id(data_dir: str | os.PathLike) -> str:
    """Stable peer id for this data directory, created on first use."""
    path = os.path.join(str(data_dir), "identity.json")
    if os.path.exists(path):
        try:
            with open(path, "r", encoding="utf-8") as f:
                doc = json.load(f)
            peer_id = doc.get("peer_id")
            if isinstance(peer_id, str) and peer_id:
                return peer_id
        except (ValueError, OSError):
            pass
    peer_id = new_peer_id()
    atomic_write_text(path, json.dumps({"peer_id": peer_id}) + "\n")
    return peer_id
