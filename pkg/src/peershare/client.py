"""Client side of the peer protocol: one connection per request."""

from __future__ import annotations

import os
import socket
import tempfile

from . import wire
from .identity import Identity
from .registry import Action

DEFAULT_TIMEOUT = 30.0


class ConnectFailed(Exception):
    """Peer not reachable."""


class RemoteError(Exception):
    """The peer answered with a protocol error (ErrResp)."""

    def __init__(self, code: str, message: str = ""):
        self.code = code
        self.message = message
        super().__init__(f"{code}: {message}" if message else code)


class _Session:
    """connect + Hello exchange; context-managed single-request session."""

    def __init__(self, address: str, port: int, identity: Identity,
                 timeout: float = DEFAULT_TIMEOUT):
        try:
            self.sock = socket.create_connection((address, port), timeout=timeout)
        except OSError as exc:
            raise ConnectFailed(f"cannot reach {address}:{port}: {exc}") from exc
        self.sock.settimeout(timeout)
        self.reader = self.sock.makefile("rb")
        try:
            self.sock.sendall(wire.encode_frame(
                wire.Hello(peer_id=identity.peer_id, name=identity.name)))
            hello = wire.decode_frame(self.reader)
            if not isinstance(hello, wire.Hello) or hello.proto != wire.PROTO:
                raise RemoteError(wire.ERR_MALFORMED, "peer did not answer with a valid Hello")
        except (wire.MalformedFrame, OSError) as exc:
            self.close()
            raise RemoteError(wire.ERR_MALFORMED, str(exc)) from exc
        except RemoteError:
            self.close()
            raise

    def request(self, message) -> wire.WireMessage:
        """Send one request frame and decode the response frame."""
        try:
            self.sock.sendall(wire.encode_frame(message))
            return self._response()
        except (wire.MalformedFrame, OSError) as exc:
            raise RemoteError(wire.ERR_MALFORMED, str(exc)) from exc

    def _response(self) -> wire.WireMessage:
        response = wire.decode_frame(self.reader)
        if response is None:
            raise RemoteError(wire.ERR_MALFORMED, "peer closed the connection mid-request")
        if isinstance(response, wire.ErrResp):
            raise RemoteError(response.code, response.message)
        return response

    def close(self) -> None:
        try:
            self.reader.close()
        except OSError:
            pass
        try:
            self.sock.close()
        except OSError:
            pass

    def __enter__(self) -> "_Session":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def list_remote(address: str, port: int, identity: Identity,
                timeout: float = DEFAULT_TIMEOUT) -> list[wire.RemoteShare]:
    with _Session(address, port, identity, timeout) as session:
        response = session.request(wire.ListReq())
        if not isinstance(response, wire.ListResp):
            raise RemoteError(wire.ERR_MALFORMED, f"unexpected {type(response).__name__}")
        return list(response.entries)


def get_remote(address: str, port: int, identity: Identity, share_id: str,
               dest_path: str, timeout: float = DEFAULT_TIMEOUT) -> int:
    """Copy a remote share to dest_path (written atomically). Returns byte count."""
    dest_path = os.path.abspath(dest_path)
    with _Session(address, port, identity, timeout) as session:
        response = session.request(wire.GetReq(share_id=share_id))
        if not isinstance(response, wire.GetResp):
            raise RemoteError(wire.ERR_MALFORMED, f"unexpected {type(response).__name__}")
        tmp_path = None
        try:
            fd, tmp_path = tempfile.mkstemp(prefix=".peershare-get-",
                                            dir=os.path.dirname(dest_path))
            with os.fdopen(fd, "wb") as tmp:
                wire.copy_exact(session.reader, tmp, response.size_bytes)
                tmp.flush()
                os.fsync(tmp.fileno())
            os.replace(tmp_path, dest_path)
            tmp_path = None
        except wire.MalformedFrame as exc:
            raise RemoteError(wire.ERR_MALFORMED, str(exc)) from exc
        finally:
            if tmp_path is not None:
                try:
                    os.unlink(tmp_path)
                except OSError:
                    pass
        return response.size_bytes


def put_remote(address: str, port: int, identity: Identity, share_id: str,
               src_path: str, timeout: float = DEFAULT_TIMEOUT) -> int:
    """Replace a remote share's content with the local file. Returns byte count."""
    size = os.stat(src_path).st_size
    with _Session(address, port, identity, timeout) as session:
        try:
            session.sock.sendall(wire.encode_frame(
                wire.PutReq(share_id=share_id, size_bytes=size)))
            with open(src_path, "rb") as f:
                while True:
                    chunk = f.read(64 * 1024)
                    if not chunk:
                        break
                    session.sock.sendall(chunk)
        except OSError as exc:
            raise RemoteError(wire.ERR_MALFORMED, str(exc)) from exc
        response = session._response()
        if not isinstance(response, wire.PutResp):
            raise RemoteError(wire.ERR_MALFORMED, f"unexpected {type(response).__name__}")
        return size


def delete_remote(address: str, port: int, identity: Identity, share_id: str,
                  timeout: float = DEFAULT_TIMEOUT) -> None:
    """Ask the owning peer to delete the shared file from its machine."""
    with _Session(address, port, identity, timeout) as session:
        response = session.request(wire.DeleteReq(share_id=share_id))
        if not isinstance(response, wire.DeleteResp):
            raise RemoteError(wire.ERR_MALFORMED, f"unexpected {type(response).__name__}")


def perform_remote(address: str, port: int, identity: Identity, action: Action,
                   share_id: str | None = None, local_path: str | None = None,
                   timeout: float = DEFAULT_TIMEOUT):
    """Uniform entry point used by the control plane."""
    if action is Action.LIST:
        return list_remote(address, port, identity, timeout)
    if share_id is None:
        raise ValueError(f"{action.value} requires a share_id")
    if action is Action.GET:
        if local_path is None:
            raise ValueError("get requires a destination path")
        return get_remote(address, port, identity, share_id, local_path, timeout)
    if action is Action.PUT:
        if local_path is None:
            raise ValueError("put requires a source path")
        return put_remote(address, port, identity, share_id, local_path, timeout)
    if action is Action.DELETE:
        return delete_remote(address, port, identity, share_id, timeout)
    raise ValueError(f"unsupported action: {action}")
