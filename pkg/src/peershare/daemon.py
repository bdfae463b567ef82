"""Daemon assembly: registry + event log + discovery + peer server + API."""

from __future__ import annotations

import logging
import os
import socket
from dataclasses import dataclass, field
from pathlib import Path

from .api import ApiServer
from .discovery import Discovery, DiscoveryConfig, PeerTable
from .events import EventLog
from .identity import Identity, load_or_create_peer_id
from .registry import ShareRegistry
from .server import PeerServer

logger = logging.getLogger(__name__)

DEFAULT_API_PORT = 40480


@dataclass
class DaemonConfig:
    data_dir: Path
    display_name: str = field(default_factory=socket.gethostname)
    protocol_port: int = 0  # 0 = ephemeral; the actual port is advertised
    api_port: int = DEFAULT_API_PORT
    api_host: str = "127.0.0.1"  # the control API is loopback-only
    discovery: DiscoveryConfig = field(default_factory=DiscoveryConfig)
    enable_discovery: bool = True
    static_dir: Path | None = None
    stream_heartbeat: float = 10.0


def _default_static_dir() -> Path | None:
    env = os.environ.get("PEERSHARE_STATIC_DIR")
    if env:
        return Path(env)
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if candidate.is_dir() else None


class Daemon:
    """One running peershare node. start() brings every subsystem up."""

    def __init__(self, config: DaemonConfig) -> None:
        self.config = config
        self.identity: Identity | None = None
        self.event_log: EventLog | None = None
        self.registry: ShareRegistry | None = None
        self.peer_table: PeerTable | None = None
        self.peer_server: PeerServer | None = None
        self.discovery: Discovery | None = None
        self.api_server: ApiServer | None = None
        self._running = False

    def start(self) -> None:
        cfg = self.config
        data_dir = Path(cfg.data_dir)
        data_dir.mkdir(parents=True, exist_ok=True)

        peer_id = load_or_create_peer_id(data_dir)
        self.identity = Identity(peer_id=peer_id, name=cfg.display_name)
        self.event_log = EventLog(data_dir / "events.log")
        self.registry = ShareRegistry(data_dir / "shares.json", self.event_log)

        self.peer_server = PeerServer(self.registry, self.event_log, self.identity,
                                      port=cfg.protocol_port)
        self.peer_server.start()

        self.peer_table = PeerTable(peer_id, self.event_log)
        if cfg.enable_discovery:
            self.discovery = Discovery(self.identity, self.peer_table, cfg.discovery,
                                       protocol_port=self.peer_server.port,
                                       share_count_fn=lambda: self.registry.count)
            self.discovery.start()

        static_dir = cfg.static_dir if cfg.static_dir is not None else _default_static_dir()
        self.api_server = ApiServer(self, host=cfg.api_host, port=cfg.api_port,
                                    heartbeat=cfg.stream_heartbeat, static_dir=static_dir)
        self.api_server.start()

        self._running = True
        logger.info("daemon %s (%s) up: protocol port %d, api http://%s:%d",
                    cfg.display_name, peer_id[:8], self.peer_server.port,
                    cfg.api_host, self.api_server.port)

    def stop(self) -> None:
        if not self._running:
            return
        self._running = False
        if self.api_server is not None:
            self.api_server.stop()
        if self.discovery is not None:
            self.discovery.stop()
        if self.peer_server is not None:
            self.peer_server.stop()
        if self.event_log is not None:
            self.event_log.close()

    def __enter__(self) -> "Daemon":
        self.start()
        return self

    def __exit__(self, *exc) -> None:
        self.stop()
