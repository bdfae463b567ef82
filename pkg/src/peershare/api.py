"""Local HTTP control plane for the daemon (loopback only).

Share-creating and share-modifying responses always carry the consequence
description in the same body — feedback is never deferred to a second
request. Destructive routes require confirm=true; the safe default is
always refusal. The event stream is line-delimited JSON over a chunked
response, heartbeat lines starting with ":".
"""

from __future__ import annotations

import json
import logging
import mimetypes
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from typing import TYPE_CHECKING
from urllib.parse import parse_qs, urlparse

from . import client as peer_client
from .feedback import describe_share
from .registry import (AlreadyShared, Action, NotAFile, PathNotFound,
                       PermissionMode, UnknownShare)

if TYPE_CHECKING:
    from .daemon import Daemon

logger = logging.getLogger(__name__)

_PLACEHOLDER_PAGE = b"""<!doctype html>
<html><head><title>peershare</title></head>
<body><h1>peershare daemon</h1>
<p>The dashboard is not built. Build the frontend (see README) or use the
<code>peershare</code> CLI against <code>/v1</code>.</p></body></html>
"""


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str):
        self.status = status
        self.code = code
        self.message = message
        super().__init__(message)


class _ApiHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    daemon: "Daemon" = None  # type: ignore[assignment]
    heartbeat: float = 10.0
    static_dir: Path | None = None

    # ── plumbing ─────────────────────────────────────────────────

    def log_message(self, fmt, *args):  # quiet the default stderr chatter
        logger.debug("api %s - %s", self.address_string(), fmt % args)

    def _send_json(self, status: int, body: dict) -> None:
        data = json.dumps(body, ensure_ascii=False).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)

    def _send_error_json(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"error": {"code": code, "message": message}})

    def _read_json_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            raise ApiError(400, "malformed", "request body required")
        try:
            body = json.loads(raw.decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as exc:
            raise ApiError(400, "malformed", f"invalid JSON body: {exc}") from exc
        if not isinstance(body, dict):
            raise ApiError(400, "malformed", "JSON body must be an object")
        return body

    def _query(self) -> dict[str, str]:
        parsed = parse_qs(urlparse(self.path).query)
        return {k: v[-1] for k, v in parsed.items()}

    def _route(self) -> list[str]:
        return [p for p in urlparse(self.path).path.split("/") if p]

    def _dispatch(self, method: str) -> None:
        try:
            self._handle(method, self._route())
        except ApiError as exc:
            self._send_error_json(exc.status, exc.code, exc.message)
        except BrokenPipeError:
            pass
        except Exception as exc:  # keep the daemon alive on handler bugs
            logger.exception("api handler error")
            try:
                self._send_error_json(500, "internal", str(exc))
            except OSError:
                pass

    def do_GET(self) -> None:
        self._dispatch("GET")

    def do_POST(self) -> None:
        self._dispatch("POST")

    def do_PATCH(self) -> None:
        self._dispatch("PATCH")

    def do_DELETE(self) -> None:
        self._dispatch("DELETE")

    # ── routing ──────────────────────────────────────────────────

    def _handle(self, method: str, parts: list[str]) -> None:
        if not parts or parts[0] != "v1":
            if method == "GET":
                return self._serve_static(parts)
            raise ApiError(404, "not_found", "unknown route")

        rest = parts[1:]
        if rest == ["shares"]:
            if method == "GET":
                return self._get_shares()
            if method == "POST":
                return self._post_share()
        elif len(rest) == 2 and rest[0] == "shares":
            if method == "PATCH":
                return self._patch_share(rest[1])
            if method == "DELETE":
                return self._delete_share(rest[1])
        elif rest == ["peers"] and method == "GET":
            return self._get_peers()
        elif len(rest) == 3 and rest[0] == "peers" and rest[2] == "files" and method == "GET":
            return self._get_peer_files(rest[1])
        elif rest == ["transfers"] and method == "POST":
            return self._post_transfer()
        elif rest == ["events"] and method == "GET":
            return self._get_events()
        elif rest == ["events", "stream"] and method == "GET":
            return self._stream_events()
        elif rest == ["status"] and method == "GET":
            return self._get_status()
        raise ApiError(404, "not_found", "unknown route")

    # ── shares ───────────────────────────────────────────────────

    def _parse_mode(self, value, default: PermissionMode | None = None) -> PermissionMode:
        if value is None:
            if default is None:
                raise ApiError(400, "malformed", "mode is required")
            return default
        try:
            return PermissionMode.parse(str(value))
        except ValueError as exc:
            raise ApiError(400, "malformed", str(exc)) from exc

    def _get_shares(self) -> None:
        shares = [e.to_dict() for e in self.daemon.registry.list_shares()]
        self._send_json(200, {"shares": shares})

    def _post_share(self) -> None:
        body = self._read_json_body()
        path = body.get("path")
        if not isinstance(path, str) or not path:
            raise ApiError(400, "malformed", "path is required")
        mode = self._parse_mode(body.get("mode"), default=PermissionMode.READ)
        try:
            entry = self.daemon.registry.add_share(path, mode)
        except PathNotFound as exc:
            raise ApiError(400, "path_not_found", str(exc)) from exc
        except NotAFile as exc:
            raise ApiError(400, "not_a_file", str(exc)) from exc
        except AlreadyShared as exc:
            raise ApiError(409, "already_shared", str(exc)) from exc
        except OSError as exc:
            raise ApiError(400, "io_error", str(exc)) from exc
        self._send_json(201, {"share": entry.to_dict(),
                              "feedback": describe_share(entry).to_dict()})

    def _patch_share(self, share_id: str) -> None:
        body = self._read_json_body()
        mode = self._parse_mode(body.get("mode"))
        try:
            entry = self.daemon.registry.set_mode(share_id, mode)
        except UnknownShare as exc:
            raise ApiError(404, "unknown_share", str(exc)) from exc
        self._send_json(200, {"share": entry.to_dict(),
                              "feedback": describe_share(entry).to_dict()})

    def _delete_share(self, share_id: str) -> None:
        if self._query().get("confirm") != "true":
            raise ApiError(428, "confirmation_required",
                           "unsharing requires confirm=true")
        try:
            entry = self.daemon.registry.remove_share(share_id)
        except UnknownShare as exc:
            raise ApiError(404, "unknown_share", str(exc)) from exc
        self._send_json(200, {"share": entry.to_dict()})

    # ── peers and transfers ──────────────────────────────────────

    def _get_peers(self) -> None:
        peers = [p.to_dict() for p in self.daemon.peer_table.peers()]
        self._send_json(200, {"peers": peers})

    def _require_peer(self, peer_id: str):
        peer = self.daemon.peer_table.get(peer_id)
        if peer is None:
            raise ApiError(404, "unknown_peer", f"unknown peer: {peer_id}")
        return peer

    def _get_peer_files(self, peer_id: str) -> None:
        peer = self._require_peer(peer_id)
        try:
            entries = peer_client.list_remote(peer.address, peer.port,
                                              self.daemon.identity)
        except peer_client.ConnectFailed as exc:
            raise ApiError(502, "connect_failed", str(exc)) from exc
        except peer_client.RemoteError as exc:
            raise ApiError(502, exc.code, exc.message) from exc
        self._send_json(200, {"files": [e.to_payload() for e in entries]})

    def _post_transfer(self) -> None:
        body = self._read_json_body()
        try:
            action = Action(str(body.get("action")))
        except ValueError:
            raise ApiError(400, "malformed",
                           "action must be one of get, put, delete") from None
        if action is Action.LIST:
            raise ApiError(400, "malformed", "use GET /v1/peers/{id}/files to browse")
        # Mutations on a peer need explicit opt-in, checked before any
        # wire traffic happens.
        if action in (Action.PUT, Action.DELETE) and body.get("confirm") is not True:
            raise ApiError(428, "confirmation_required",
                           f"{action.value} on a peer requires confirm=true")
        peer_id = body.get("peer_id")
        if not isinstance(peer_id, str) or not peer_id:
            raise ApiError(400, "malformed", "peer_id is required")
        share_id = body.get("share_id")
        if not isinstance(share_id, str) or not share_id:
            raise ApiError(400, "malformed", "share_id is required")
        local_path = body.get("local_path")
        if action in (Action.GET, Action.PUT):
            if not isinstance(local_path, str) or not local_path:
                raise ApiError(400, "malformed",
                               f"{action.value} requires local_path")
        peer = self._require_peer(peer_id)
        try:
            result = peer_client.perform_remote(peer.address, peer.port,
                                                self.daemon.identity, action,
                                                share_id=share_id, local_path=local_path)
        except peer_client.ConnectFailed as exc:
            raise ApiError(502, "connect_failed", str(exc)) from exc
        except peer_client.RemoteError as exc:
            raise ApiError(502, exc.code, exc.message) from exc
        except OSError as exc:
            raise ApiError(400, "io_error", str(exc)) from exc
        response = {"result": "ok", "action": action.value, "share_id": share_id}
        if action is Action.GET:
            response["saved_to"] = local_path
            response["size_bytes"] = result
        elif action is Action.PUT:
            response["size_bytes"] = result
        self._send_json(200, response)

    # ── events ───────────────────────────────────────────────────

    def _get_events(self) -> None:
        q = self._query()
        try:
            since = int(q.get("since", 0))
            limit = int(q["limit"]) if "limit" in q else None
        except ValueError as exc:
            raise ApiError(400, "malformed", str(exc)) from exc
        records = self.daemon.event_log.read(
            since, what=q.get("what"), outcome=q.get("outcome"),
            share_id=q.get("share_id"), peer_id=q.get("peer_id"), limit=limit)
        self._send_json(200, {"events": [r.to_dict() for r in records]})

    def _stream_events(self) -> None:
        q = self._query()
        try:
            since = int(q.get("since", 0))
        except ValueError as exc:
            raise ApiError(400, "malformed", str(exc)) from exc

        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson; charset=utf-8")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Transfer-Encoding", "chunked")
        self.send_header("Connection", "close")
        self.end_headers()
        self.close_connection = True

        sub = self.daemon.event_log.subscribe(since)
        last_write = time.monotonic()
        try:
            while sub.live:
                record = sub.get(timeout=0.25)
                if record is not None:
                    self._write_chunk(record.to_line().encode("utf-8"))
                    last_write = time.monotonic()
                elif time.monotonic() - last_write >= self.heartbeat:
                    self._write_chunk(b":hb\n")
                    last_write = time.monotonic()
            self._write_chunk(b"")  # terminating chunk
        except OSError:
            pass  # client went away
        finally:
            self.daemon.event_log.unsubscribe(sub)

    def _write_chunk(self, data: bytes) -> None:
        self.wfile.write(b"%X\r\n" % len(data) + data + b"\r\n")
        self.wfile.flush()

    # ── status and static assets ─────────────────────────────────

    def _get_status(self) -> None:
        daemon = self.daemon
        self._send_json(200, {
            "peer_id": daemon.identity.peer_id,
            "name": daemon.identity.name,
            "protocol_port": daemon.peer_server.port,
            "api_port": daemon.api_server.port,
            "data_dir": str(daemon.config.data_dir),
            "degraded_audit": daemon.event_log.degraded,
            "counters": {
                "shares": daemon.registry.count,
                "peers": len(daemon.peer_table),
                "events": daemon.event_log.count,
                "wire_requests": daemon.peer_server.requests_served,
                "wire_malformed": daemon.peer_server.malformed_count,
                "discovery_malformed": daemon.peer_table.malformed_count,
            },
        })

    def _serve_static(self, parts: list[str]) -> None:
        if self.static_dir is None:
            if parts:
                raise ApiError(404, "not_found", "unknown route")
            self.send_response(200)
            self.send_header("Content-Type", "text/html; charset=utf-8")
            self.send_header("Content-Length", str(len(_PLACEHOLDER_PAGE)))
            self.end_headers()
            self.wfile.write(_PLACEHOLDER_PAGE)
            return
        root = self.static_dir.resolve()
        target = (root / "/".join(parts)).resolve() if parts else root / "index.html"
        if root not in target.parents and target != root:
            raise ApiError(404, "not_found", "unknown route")
        if target.is_dir():
            target = target / "index.html"
        if not target.is_file():
            raise ApiError(404, "not_found", "unknown route")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        data = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(data)))
        self.end_headers()
        self.wfile.write(data)


class ApiServer:
    """Threaded HTTP server wrapper; binds loopback only."""

    def __init__(self, daemon: "Daemon", host: str = "127.0.0.1", port: int = 0,
                 heartbeat: float = 10.0, static_dir: Path | None = None) -> None:
        handler = type("Handler", (_ApiHandler,),
                       {"daemon": daemon, "heartbeat": heartbeat, "static_dir": static_dir})
        self._httpd = ThreadingHTTPServer((host, port), handler)
        self._httpd.daemon_threads = True
        self.port: int = self._httpd.server_address[1]
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        self._thread = threading.Thread(
            target=lambda: self._httpd.serve_forever(poll_interval=0.1),
            name="api-server", daemon=True)
        self._thread.start()

    def stop(self) -> None:
        self._httpd.shutdown()
        self._httpd.server_close()
        if self._thread is not None:
            self._thread.join(timeout=2.0)
            self._thread = None
