"""LAN peer discovery via periodic UDP announcements.

Each daemon multicasts a small JSON datagram every ANNOUNCE_INTERVAL
seconds and expires peers not heard from within EXPIRY_TIMEOUT (three
missed intervals). Announcements are also accepted via plain unicast to
the same port, which makes loopback testing possible without multicast
support; a daemon can likewise be configured to announce to explicit
unicast targets.

A peer's address is always taken from the datagram's source IP, never
from the payload (payload-supplied addresses are spoofable).
"""

from __future__ import annotations

import enum
import json
import logging
import socket
import threading
import time
from dataclasses import dataclass, field

from . import events
from .events import EventLog
from .identity import Identity

logger = logging.getLogger(__name__)

PROTO = "peershare/1"
MULTICAST_GROUP = "239.255.77.77"
DISCOVERY_PORT = 40404
ANNOUNCE_INTERVAL = 5.0
EXPIRY_TIMEOUT = 15.0
MAX_DATAGRAM = 512

KIND_ALIVE = "alive"
KIND_BYE = "bye"


@dataclass(frozen=True)
class Announcement:
    """One discovery datagram. Field names on the wire are exact."""

    peer_id: str
    name: str
    port: int
    shares: int
    kind: str = KIND_ALIVE
    proto: str = PROTO

    def encode(self) -> bytes:
        return json.dumps(
            {"proto": self.proto, "peer_id": self.peer_id, "name": self.name,
             "port": self.port, "shares": self.shares, "kind": self.kind},
            separators=(",", ":"), ensure_ascii=False,
        ).encode("utf-8")

    @classmethod
    def decode(cls, data: bytes) -> "Announcement":
        doc = json.loads(data.decode("utf-8"))
        if not isinstance(doc, dict):
            raise ValueError("datagram is not a JSON object")
        proto = doc.get("proto")
        peer_id = doc.get("peer_id")
        name = doc.get("name")
        port = doc.get("port")
        shares = doc.get("shares")
        kind = doc.get("kind")
        if not isinstance(proto, str):
            raise ValueError("missing proto tag")
        if not isinstance(peer_id, str) or not peer_id:
            raise ValueError("missing peer_id")
        if not isinstance(name, str):
            raise ValueError("missing name")
        if not isinstance(port, int) or isinstance(port, bool) or not 0 < port < 65536:
            raise ValueError("invalid port")
        if not isinstance(shares, int) or isinstance(shares, bool) or shares < 0:
            raise ValueError("invalid share count")
        if kind not in (KIND_ALIVE, KIND_BYE):
            raise ValueError("invalid kind")
        return cls(peer_id=peer_id, name=name, port=port, shares=shares,
                   kind=kind, proto=proto)


def make_announcement(identity: Identity, protocol_port: int, share_count: int,
                      kind: str = KIND_ALIVE) -> Announcement:
    return Announcement(peer_id=identity.peer_id, name=identity.name,
                        port=protocol_port, shares=share_count, kind=kind)


@dataclass
class PeerInfo:
    peer_id: str
    name: str
    address: str
    port: int
    last_seen: float  # monotonic clock
    share_count: int

    def to_dict(self, now: float | None = None) -> dict:
        now = time.monotonic() if now is None else now
        return {
            "peer_id": self.peer_id,
            "name": self.name,
            "address": self.address,
            "port": self.port,
            "share_count": self.share_count,
            "last_seen_age": max(0.0, now - self.last_seen),
        }


class DatagramResult(enum.Enum):
    ADDED = "added"
    REFRESHED = "refreshed"
    REMOVED = "removed"
    IGNORED = "ignored"


class PeerTable:
    """Liveness-tracked table of remote peers. Own peer id never appears."""

    def __init__(self, own_peer_id: str, event_log: EventLog | None = None) -> None:
        self._own_peer_id = own_peer_id
        self._log = event_log
        self._lock = threading.Lock()
        self._peers: dict[str, PeerInfo] = {}
        self.malformed_count = 0

    def apply_datagram(self, data: bytes, source_address: str, now: float) -> DatagramResult:
        """Fold one datagram into the table. Malformed input is ignored, counted."""
        if len(data) > MAX_DATAGRAM:
            with self._lock:
                self.malformed_count += 1
            return DatagramResult.IGNORED
        try:
            ann = Announcement.decode(data)
        except (ValueError, UnicodeDecodeError):
            with self._lock:
                self.malformed_count += 1
            return DatagramResult.IGNORED
        if ann.proto != PROTO:
            return DatagramResult.IGNORED
        if ann.peer_id == self._own_peer_id:
            return DatagramResult.IGNORED

        joined: PeerInfo | None = None
        left: PeerInfo | None = None
        with self._lock:
            existing = self._peers.get(ann.peer_id)
            if ann.kind == KIND_BYE:
                if existing is None:
                    return DatagramResult.IGNORED
                left = self._peers.pop(ann.peer_id)
                result = DatagramResult.REMOVED
            elif existing is None:
                joined = PeerInfo(peer_id=ann.peer_id, name=ann.name,
                                  address=source_address, port=ann.port,
                                  last_seen=now, share_count=ann.shares)
                self._peers[ann.peer_id] = joined
                result = DatagramResult.ADDED
            else:
                existing.name = ann.name
                existing.address = source_address
                existing.port = ann.port
                existing.share_count = ann.shares
                existing.last_seen = max(existing.last_seen, now)
                result = DatagramResult.REFRESHED

        if joined is not None:
            self._emit(events.PEER_JOINED, joined)
        if left is not None:
            self._emit(events.PEER_LEFT, left)
        return result

    def expire(self, now: float, timeout: float = EXPIRY_TIMEOUT) -> list[PeerInfo]:
        """Drop every peer with now - last_seen > timeout."""
        assert timeout > 0
        with self._lock:
            stale = [p for p in self._peers.values() if now - p.last_seen > timeout]
            for peer in stale:
                del self._peers[peer.peer_id]
        for peer in stale:
            self._emit(events.PEER_LEFT, peer)
        return stale

    def peers(self) -> list[PeerInfo]:
        with self._lock:
            return sorted(self._peers.values(), key=lambda p: (p.name, p.peer_id))

    def get(self, peer_id: str) -> PeerInfo | None:
        with self._lock:
            return self._peers.get(peer_id)

    def __len__(self) -> int:
        with self._lock:
            return len(self._peers)

    def _emit(self, what: str, peer: PeerInfo) -> None:
        if self._log is None:
            return
        self._log.append(what, events.INFO, peer_id=peer.peer_id, peer_name=peer.name,
                         detail=f"{peer.address}:{peer.port}")


@dataclass
class DiscoveryConfig:
    port: int = DISCOVERY_PORT
    multicast_group: str = MULTICAST_GROUP
    announce_interval: float = ANNOUNCE_INTERVAL
    expiry_timeout: float = EXPIRY_TIMEOUT
    enable_multicast: bool = True
    #: Extra (host, port) datagram targets; lets loopback daemons find each other.
    unicast_targets: tuple[tuple[str, int], ...] = field(default_factory=tuple)


class Discovery:
    """Announcer + receiver + expirer threads around one PeerTable."""

    def __init__(self, identity: Identity, table: PeerTable, config: DiscoveryConfig,
                 protocol_port: int, share_count_fn=None) -> None:
        self._identity = identity
        self._table = table
        self._config = config
        self._protocol_port = protocol_port
        self._share_count_fn = share_count_fn or (lambda: 0)
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self._recv_sock: socket.socket | None = None
        self._send_sock: socket.socket | None = None
        self._started = False

    def start(self) -> None:
        cfg = self._config
        recv = socket.socket(socket.AF_INET, socket.SOCK_DGRAM, socket.IPPROTO_UDP)
        recv.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        recv.bind(("", cfg.port))
        if cfg.enable_multicast:
            try:
                mreq = socket.inet_aton(cfg.multicast_group) + socket.inet_aton("0.0.0.0")
                recv.setsockopt(socket.IPPROTO_IP, socket.IP_ADD_MEMBERSHIP, mreq)
            except OSError as exc:
                logger.warning("multicast join failed (%s); unicast reception still works", exc)
        recv.settimeout(0.5)
        self._recv_sock = recv

        send = socket.socket(socket.AF_INET, socket.SOCK_DGRAM, socket.IPPROTO_UDP)
        send.setsockopt(socket.IPPROTO_IP, socket.IP_MULTICAST_TTL, 1)
        self._send_sock = send

        self._stop.clear()
        self._threads = [
            threading.Thread(target=self._recv_loop, name="discovery-recv", daemon=True),
            threading.Thread(target=self._announce_loop, name="discovery-announce", daemon=True),
            threading.Thread(target=self._expire_loop, name="discovery-expire", daemon=True),
        ]
        for t in self._threads:
            t.start()
        self._started = True

    def stop(self, send_bye: bool = True) -> None:
        if not self._started:
            return
        if send_bye:
            self.announce(KIND_BYE)
        self._stop.set()
        for t in self._threads:
            t.join(timeout=2.0)
        self._threads = []
        if self._recv_sock is not None:
            self._recv_sock.close()
            self._recv_sock = None
        if self._send_sock is not None:
            self._send_sock.close()
            self._send_sock = None
        self._started = False

    def announce(self, kind: str = KIND_ALIVE) -> None:
        """Send one announcement to the multicast group and all unicast targets."""
        if self._send_sock is None:
            return
        ann = make_announcement(self._identity, self._protocol_port,
                                self._share_count_fn(), kind)
        data = ann.encode()
        if len(data) > MAX_DATAGRAM:
            logger.warning("announcement of %d bytes exceeds %d byte cap, not sent",
                           len(data), MAX_DATAGRAM)
            return
        cfg = self._config
        targets: list[tuple[str, int]] = []
        if cfg.enable_multicast:
            targets.append((cfg.multicast_group, cfg.port))
        targets.extend(cfg.unicast_targets)
        for target in targets:
            try:
                self._send_sock.sendto(data, target)
            except OSError as exc:
                logger.debug("announce to %s failed: %s", target, exc)

    # ── loops ────────────────────────────────────────────────────

    def _announce_loop(self) -> None:
        while not self._stop.is_set():
            self.announce(KIND_ALIVE)
            self._stop.wait(self._config.announce_interval)

    def _recv_loop(self) -> None:
        while not self._stop.is_set():
            assert self._recv_sock is not None
            try:
                data, (src_ip, _src_port) = self._recv_sock.recvfrom(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            self._table.apply_datagram(data, src_ip, time.monotonic())

    def _expire_loop(self) -> None:
        tick = min(1.0, self._config.expiry_timeout / 3)
        while not self._stop.wait(tick):
            self._table.expire(time.monotonic(), self._config.expiry_timeout)
