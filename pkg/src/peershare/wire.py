"""Framed request/response protocol between daemons.

Frame layout on the wire:

    ┌───────────────┬───────────┬──────────────────┐
    │ body len (4B) │ type (1B) │  UTF-8 JSON body │
    │ u32 BE        │ u8        │                  │
    └───────────────┴───────────┴──────────────────┘

The length prefix counts the JSON body only. File content for GetResp and
PutReq follows its frame as exactly size_bytes raw unframed bytes, so the
1 MiB body cap never constrains file size. One request per connection;
each side sends Hello first.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import BinaryIO, ClassVar

PROTO = "peershare/1"
MAX_BODY = 1 << 20  # JSON bodies only; file content is unbounded

# type_code assignments
T_HELLO = 0x00
T_LIST_REQ = 0x01
T_GET_REQ = 0x02
T_PUT_REQ = 0x03
T_DELETE_REQ = 0x04
T_LIST_RESP = 0x81
T_GET_RESP = 0x82
T_PUT_RESP = 0x83
T_DELETE_RESP = 0x84
T_ERR_RESP = 0xFF

# ErrResp codes
ERR_DENIED = "denied"
ERR_UNKNOWN_SHARE = "unknown_share"
ERR_MALFORMED = "malformed"
ERR_IO = "io_error"
ERR_CODES = frozenset({ERR_DENIED, ERR_UNKNOWN_SHARE, ERR_MALFORMED, ERR_IO})

_MODES = frozenset({"read", "write", "full"})


class MalformedFrame(Exception):
    """Undecodable input: bad length, unknown type, invalid JSON, truncation."""


class OversizeBody(ValueError):
    """Encode-side refusal: JSON body would exceed MAX_BODY."""


def _req_str(payload: dict, key: str) -> str:
    value = payload.get(key)
    if not isinstance(value, str):
        raise MalformedFrame(f"missing or non-string field {key!r}")
    return value


def _req_int(payload: dict, key: str, minimum: int = 0) -> int:
    value = payload.get(key)
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise MalformedFrame(f"missing or invalid integer field {key!r}")
    return value


@dataclass(frozen=True)
class Hello:
    TYPE_CODE: ClassVar[int] = T_HELLO
    peer_id: str
    name: str
    proto: str = PROTO

    def to_payload(self) -> dict:
        return {"proto": self.proto, "peer_id": self.peer_id, "name": self.name}

    @classmethod
    def from_payload(cls, payload: dict) -> "Hello":
        return cls(peer_id=_req_str(payload, "peer_id"), name=_req_str(payload, "name"),
                   proto=_req_str(payload, "proto"))


@dataclass(frozen=True)
class ListReq:
    TYPE_CODE: ClassVar[int] = T_LIST_REQ

    def to_payload(self) -> dict:
        return {}

    @classmethod
    def from_payload(cls, payload: dict) -> "ListReq":
        return cls()


@dataclass(frozen=True)
class RemoteShare:
    """Public view of a share as sent to peers: no local path."""

    share_id: str
    display_name: str
    mode: str
    size_bytes: int
    modified_at: str

    def to_payload(self) -> dict:
        return {
            "share_id": self.share_id,
            "display_name": self.display_name,
            "mode": self.mode,
            "size_bytes": self.size_bytes,
            "modified_at": self.modified_at,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "RemoteShare":
        mode = _req_str(payload, "mode")
        if mode not in _MODES:
            raise MalformedFrame(f"unknown share mode {mode!r}")
        return cls(
            share_id=_req_str(payload, "share_id"),
            display_name=_req_str(payload, "display_name"),
            mode=mode,
            size_bytes=_req_int(payload, "size_bytes"),
            modified_at=_req_str(payload, "modified_at"),
        )


@dataclass(frozen=True)
class ListResp:
    TYPE_CODE: ClassVar[int] = T_LIST_RESP
    entries: tuple[RemoteShare, ...] = field(default_factory=tuple)

    def to_payload(self) -> dict:
        return {"entries": [e.to_payload() for e in self.entries]}

    @classmethod
    def from_payload(cls, payload: dict) -> "ListResp":
        raw = payload.get("entries")
        if not isinstance(raw, list):
            raise MalformedFrame("missing or non-list field 'entries'")
        entries = []
        for item in raw:
            if not isinstance(item, dict):
                raise MalformedFrame("share entry is not an object")
            entries.append(RemoteShare.from_payload(item))
        return cls(entries=tuple(entries))


@dataclass(frozen=True)
class GetReq:
    TYPE_CODE: ClassVar[int] = T_GET_REQ
    share_id: str

    def to_payload(self) -> dict:
        return {"share_id": self.share_id}

    @classmethod
    def from_payload(cls, payload: dict) -> "GetReq":
        return cls(share_id=_req_str(payload, "share_id"))


@dataclass(frozen=True)
class GetResp:
    """Followed on the wire by exactly size_bytes of raw file content."""

    TYPE_CODE: ClassVar[int] = T_GET_RESP
    size_bytes: int

    def to_payload(self) -> dict:
        return {"size_bytes": self.size_bytes}

    @classmethod
    def from_payload(cls, payload: dict) -> "GetResp":
        return cls(size_bytes=_req_int(payload, "size_bytes"))


@dataclass(frozen=True)
class PutReq:
    """Followed on the wire by exactly size_bytes of raw file content."""

    TYPE_CODE: ClassVar[int] = T_PUT_REQ
    share_id: str
    size_bytes: int

    def to_payload(self) -> dict:
        return {"share_id": self.share_id, "size_bytes": self.size_bytes}

    @classmethod
    def from_payload(cls, payload: dict) -> "PutReq":
        return cls(share_id=_req_str(payload, "share_id"),
                   size_bytes=_req_int(payload, "size_bytes"))


@dataclass(frozen=True)
class PutResp:
    TYPE_CODE: ClassVar[int] = T_PUT_RESP

    def to_payload(self) -> dict:
        return {}

    @classmethod
    def from_payload(cls, payload: dict) -> "PutResp":
        return cls()


@dataclass(frozen=True)
class DeleteReq:
    TYPE_CODE: ClassVar[int] = T_DELETE_REQ
    share_id: str

    def to_payload(self) -> dict:
        return {"share_id": self.share_id}

    @classmethod
    def from_payload(cls, payload: dict) -> "DeleteReq":
        return cls(share_id=_req_str(payload, "share_id"))


@dataclass(frozen=True)
class DeleteResp:
    TYPE_CODE: ClassVar[int] = T_DELETE_RESP

    def to_payload(self) -> dict:
        return {}

    @classmethod
    def from_payload(cls, payload: dict) -> "DeleteResp":
        return cls()


@dataclass(frozen=True)
class ErrResp:
    TYPE_CODE: ClassVar[int] = T_ERR_RESP
    code: str
    message: str = ""

    def to_payload(self) -> dict:
        return {"code": self.code, "message": self.message}

    @classmethod
    def from_payload(cls, payload: dict) -> "ErrResp":
        code = _req_str(payload, "code")
        if code not in ERR_CODES:
            raise MalformedFrame(f"unknown error code {code!r}")
        return cls(code=code, message=_req_str(payload, "message"))


WireMessage = (Hello | ListReq | ListResp | GetReq | GetResp
               | PutReq | PutResp | DeleteReq | DeleteResp | ErrResp)

MESSAGE_TYPES: dict[int, type] = {
    cls.TYPE_CODE: cls
    for cls in (Hello, ListReq, ListResp, GetReq, GetResp,
                PutReq, PutResp, DeleteReq, DeleteResp, ErrResp)
}


def encode_frame(message: WireMessage) -> bytes:
    """Frame a message: u32 BE body length, type byte, JSON body."""
    body = json.dumps(message.to_payload(), separators=(",", ":")).encode("utf-8")
    if len(body) > MAX_BODY:
        raise OversizeBody(f"body is {len(body)} bytes, cap is {MAX_BODY}")
    return struct.pack(">IB", len(body), message.TYPE_CODE) + body


def read_exact(stream: BinaryIO, n: int) -> bytes:
    """Read exactly n bytes; raise MalformedFrame on early EOF."""
    chunks = []
    remaining = n
    while remaining > 0:
        chunk = stream.read(remaining)
        if not chunk:
            raise MalformedFrame(f"truncated stream: wanted {n} bytes, got {n - remaining}")
        chunks.append(chunk)
        remaining -= len(chunk)
    return b"".join(chunks)


def decode_frame(stream: BinaryIO) -> WireMessage | None:
    """Read one frame. Returns None on clean EOF at a frame boundary.

    Raises MalformedFrame for truncated prefixes, oversize declarations,
    unknown type codes, invalid JSON, or payloads missing required fields.
    """
    prefix = stream.read(4)
    if not prefix:
        return None
    if len(prefix) < 4:
        prefix += stream.read(4 - len(prefix)) or b""
        if len(prefix) < 4:
            raise MalformedFrame("truncated length prefix")
    (length,) = struct.unpack(">I", prefix)
    if length > MAX_BODY:
        raise MalformedFrame(f"declared body of {length} bytes exceeds {MAX_BODY} cap")
    type_code = read_exact(stream, 1)[0]
    body = read_exact(stream, length)
    cls = MESSAGE_TYPES.get(type_code)
    if cls is None:
        raise MalformedFrame(f"unknown type code 0x{type_code:02X}")
    try:
        payload = json.loads(body.decode("utf-8"))
    except (ValueError, UnicodeDecodeError) as exc:
        raise MalformedFrame(f"invalid JSON body: {exc}") from exc
    if not isinstance(payload, dict):
        raise MalformedFrame("JSON body is not an object")
    return cls.from_payload(payload)


def copy_exact(stream: BinaryIO, out: BinaryIO, n: int, chunk_size: int = 64 * 1024) -> None:
    """Copy exactly n content bytes from stream to out."""
    remaining = n
    while remaining > 0:
        chunk = stream.read(min(chunk_size, remaining))
        if not chunk:
            raise MalformedFrame(f"truncated content: wanted {n} bytes, got {n - remaining}")
        out.write(chunk)
        remaining -= len(chunk)


def drain_exact(stream: BinaryIO, n: int, chunk_size: int = 64 * 1024) -> None:
    """Read and discard exactly n content bytes (denied put bodies)."""
    remaining = n
    while remaining > 0:
        chunk = stream.read(min(chunk_size, remaining))
        if not chunk:
            raise MalformedFrame(f"truncated content: wanted {n} bytes, got {n - remaining}")
        remaining -= len(chunk)
