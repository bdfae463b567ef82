"""TCP serving side of the peer protocol.

Connection lifecycle: accept, exchange Hello both ways, serve exactly one
request, close. Every request — allowed or denied — is recorded as exactly
one access event before the response is sent. Enforcement is a single call
into registry.authorize; there is no other path to a shared file.
"""

from __future__ import annotations

import logging
import os
import socket
import tempfile
import threading

from . import events, wire
from .events import EventLog
from .identity import Identity
from .registry import Action, ShareRegistry, authorize

logger = logging.getLogger(__name__)

CONNECTION_TIMEOUT = 30.0


class PeerServer:
    """Serves the framed protocol for one daemon."""

    def __init__(self, registry: ShareRegistry, event_log: EventLog,
                 identity: Identity, host: str = "", port: int = 0) -> None:
        self._registry = registry
        self._log = event_log
        self._identity = identity
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        self._sock.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        self._sock.bind((host, port))
        self._sock.listen(16)
        self._sock.settimeout(0.5)  # lets the accept loop notice shutdown
        self.port: int = self._sock.getsockname()[1]
        self._accept_thread: threading.Thread | None = None
        self._stopping = threading.Event()
        self.requests_served = 0
        self.malformed_count = 0

    def start(self) -> None:
        self._accept_thread = threading.Thread(target=self._accept_loop,
                                               name="peer-server", daemon=True)
        self._accept_thread.start()

    def stop(self) -> None:
        self._stopping.set()
        try:
            self._sock.close()
        except OSError:
            pass
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=2.0)
            self._accept_thread = None

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                conn, addr = self._sock.accept()
            except socket.timeout:
                continue
            except OSError:
                break
            conn.settimeout(CONNECTION_TIMEOUT)
            threading.Thread(target=self._handle_connection, args=(conn, addr),
                             name="peer-conn", daemon=True).start()

    # ── per-connection session ───────────────────────────────────

    def _handle_connection(self, conn: socket.socket, addr) -> None:
        reader = conn.makefile("rb")
        requester: Identity | None = None
        try:
            hello = wire.decode_frame(reader)
            if hello is None:
                return
            if not isinstance(hello, wire.Hello) or hello.proto != wire.PROTO:
                raise wire.MalformedFrame("connection did not open with a valid Hello")
            requester = Identity(peer_id=hello.peer_id, name=hello.name)
            conn.sendall(wire.encode_frame(
                wire.Hello(peer_id=self._identity.peer_id, name=self._identity.name)))

            request = wire.decode_frame(reader)
            if request is None:
                return
            self._dispatch(conn, reader, request, requester)
        except wire.MalformedFrame as exc:
            self.malformed_count += 1
            self._log.append(
                events.MALFORMED, events.INFO,
                peer_id=requester.peer_id if requester else "",
                peer_name=requester.name if requester else "",
                detail=str(exc),
            )
            self._try_send(conn, wire.ErrResp(wire.ERR_MALFORMED, str(exc)))
        except OSError as exc:
            logger.debug("connection from %s dropped: %s", addr, exc)
        finally:
            try:
                reader.close()
            except OSError:
                pass
            try:
                conn.close()
            except OSError:
                pass

    def _dispatch(self, conn: socket.socket, reader, request, requester: Identity) -> None:
        self.requests_served += 1
        if isinstance(request, wire.ListReq):
            self._serve_list(conn, requester)
        elif isinstance(request, wire.GetReq):
            self._serve_get(conn, request, requester)
        elif isinstance(request, wire.PutReq):
            self._serve_put(conn, reader, request, requester)
        elif isinstance(request, wire.DeleteReq):
            self._serve_delete(conn, request, requester)
        else:
            raise wire.MalformedFrame(
                f"unexpected message type {type(request).__name__} as a request")

    def _try_send(self, conn: socket.socket, message) -> None:
        try:
            conn.sendall(wire.encode_frame(message))
        except OSError:
            pass

    def _access_event(self, what: str, outcome: str, requester: Identity,
                      share_id: str = "", share_name: str = "", detail: str = "") -> None:
        self._log.append(what, outcome, share_id=share_id, share_name=share_name,
                         peer_id=requester.peer_id, peer_name=requester.name,
                         detail=detail)

    # ── request handlers ─────────────────────────────────────────

    def _serve_list(self, conn: socket.socket, requester: Identity) -> None:
        entries = tuple(
            wire.RemoteShare(share_id=e.share_id, display_name=e.display_name,
                             mode=e.mode.value, size_bytes=e.size_bytes,
                             modified_at=e.modified_at)
            for e in self._registry.list_shares()
        )
        self._access_event(events.LIST, events.ALLOWED, requester,
                           detail=f"{len(entries)} shares")
        conn.sendall(wire.encode_frame(wire.ListResp(entries=entries)))

    def _serve_get(self, conn: socket.socket, request: wire.GetReq,
                   requester: Identity) -> None:
        entry = self._registry.get(request.share_id)
        if entry is None:
            self._access_event(events.GET, events.DENIED, requester,
                               share_id=request.share_id, detail="unknown share")
            self._try_send(conn, wire.ErrResp(wire.ERR_UNKNOWN_SHARE, request.share_id))
            return
        if not authorize(Action.GET, entry.mode):
            self._access_event(events.GET, events.DENIED, requester,
                               share_id=entry.share_id, share_name=entry.display_name,
                               detail=f"mode {entry.mode.value}")
            self._try_send(conn, wire.ErrResp(wire.ERR_DENIED, f"mode is {entry.mode.value}"))
            return
        try:
            f = open(entry.path, "rb")
        except OSError as exc:
            self._access_event(events.GET, events.DENIED, requester,
                               share_id=entry.share_id, share_name=entry.display_name,
                               detail=f"io_error: {exc}")
            self._try_send(conn, wire.ErrResp(wire.ERR_IO, str(exc)))
            return
        with f:
            # Size and content come from the same open fd: a concurrent put
            # replaces the path by rename, so this stream stays consistent.
            size = os.fstat(f.fileno()).st_size
            self._access_event(events.GET, events.ALLOWED, requester,
                               share_id=entry.share_id, share_name=entry.display_name,
                               detail=f"{size} bytes")
            conn.sendall(wire.encode_frame(wire.GetResp(size_bytes=size)))
            remaining = size
            while remaining > 0:
                chunk = f.read(min(64 * 1024, remaining))
                if not chunk:
                    break
                conn.sendall(chunk)
                remaining -= len(chunk)

    def _serve_put(self, conn: socket.socket, reader, request: wire.PutReq,
                   requester: Identity) -> None:
        entry = self._registry.get(request.share_id)
        if entry is None:
            wire.drain_exact(reader, request.size_bytes)
            self._access_event(events.PUT, events.DENIED, requester,
                               share_id=request.share_id, detail="unknown share")
            self._try_send(conn, wire.ErrResp(wire.ERR_UNKNOWN_SHARE, request.share_id))
            return
        if not authorize(Action.PUT, entry.mode):
            wire.drain_exact(reader, request.size_bytes)
            self._access_event(events.PUT, events.DENIED, requester,
                               share_id=entry.share_id, share_name=entry.display_name,
                               detail=f"mode {entry.mode.value}")
            self._try_send(conn, wire.ErrResp(wire.ERR_DENIED, f"mode is {entry.mode.value}"))
            return

        directory = os.path.dirname(entry.path)
        tmp_path = None
        try:
            fd, tmp_path = tempfile.mkstemp(prefix=".peershare-put-", dir=directory)
            with os.fdopen(fd, "wb") as tmp:
                wire.copy_exact(reader, tmp, request.size_bytes)
                tmp.flush()
                os.fsync(tmp.fileno())
            os.replace(tmp_path, entry.path)
            tmp_path = None
        except wire.MalformedFrame:
            raise
        except OSError as exc:
            self._access_event(events.PUT, events.DENIED, requester,
                               share_id=entry.share_id, share_name=entry.display_name,
                               detail=f"io_error: {exc}")
            self._try_send(conn, wire.ErrResp(wire.ERR_IO, str(exc)))
            return
        finally:
            if tmp_path is not None:
                try:
                    os.unlink(tmp_path)
                except OSError:
                    pass
        self._registry.apply_remote_put(entry.share_id, request.size_bytes)
        self._access_event(events.PUT, events.ALLOWED, requester,
                           share_id=entry.share_id, share_name=entry.display_name,
                           detail=f"{request.size_bytes} bytes")
        self._try_send(conn, wire.PutResp())

    def _serve_delete(self, conn: socket.socket, request: wire.DeleteReq,
                      requester: Identity) -> None:
        entry = self._registry.get(request.share_id)
        if entry is None:
            self._access_event(events.DELETE, events.DENIED, requester,
                               share_id=request.share_id, detail="unknown share")
            self._try_send(conn, wire.ErrResp(wire.ERR_UNKNOWN_SHARE, request.share_id))
            return
        if not authorize(Action.DELETE, entry.mode):
            self._access_event(events.DELETE, events.DENIED, requester,
                               share_id=entry.share_id, share_name=entry.display_name,
                               detail=f"mode {entry.mode.value}")
            self._try_send(conn, wire.ErrResp(wire.ERR_DENIED, f"mode is {entry.mode.value}"))
            return
        try:
            os.unlink(entry.path)
        except FileNotFoundError:
            pass  # stale entry; dropping it is still the right outcome
        except OSError as exc:
            self._access_event(events.DELETE, events.DENIED, requester,
                               share_id=entry.share_id, share_name=entry.display_name,
                               detail=f"io_error: {exc}")
            self._try_send(conn, wire.ErrResp(wire.ERR_IO, str(exc)))
            return
        self._registry.apply_remote_delete(entry.share_id)
        self._access_event(events.DELETE, events.ALLOWED, requester,
                           share_id=entry.share_id, share_name=entry.display_name)
        self._try_send(conn, wire.DeleteResp())
