"""Small shared helpers: RFC 3339 timestamps and atomic file replacement."""

from __future__ import annotations

import os
import tempfile
from datetime import datetime, timezone


def rfc3339_now() -> str:
    """Current wall-clock time as an RFC 3339 UTC string."""
    return rfc3339_from(datetime.now(timezone.utc))


def rfc3339_from(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    # fixed-width microseconds keep lexicographic order == chronological order
    value = dt.astimezone(timezone.utc).isoformat(timespec="microseconds")
    return value.replace("+00:00", "Z")


def parse_rfc3339(value: str) -> datetime:
    # Python 3.10 fromisoformat does not accept a trailing "Z".
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


def atomic_write_bytes(path: str, data: bytes) -> None:
    """Write *data* to *path* via a temp file in the same directory + rename.

    Readers holding the old file open keep seeing the complete old content;
    new opens see the complete new content. Never a mix.
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix=".peershare-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except BaseException:
        try:
            os.unlink(tmp_path)
        except OSError:
            pass
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
