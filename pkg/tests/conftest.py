"""Shared fixtures: event logs, registries, and loopback daemons."""

from __future__ import annotations

import socket
import time

import pytest

from peershare.daemon import Daemon, DaemonConfig
from peershare.discovery import Announcement
from peershare.events import EventLog
from peershare.registry import ShareRegistry


def free_udp_port() -> int:
    s = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


def link_peers(a: Daemon, b: Daemon) -> None:
    """Make a and b know each other without running discovery."""
    for us, them in ((a, b), (b, a)):
        datagram = Announcement(peer_id=them.identity.peer_id, name=them.identity.name,
                                port=them.peer_server.port, shares=them.registry.count).encode()
        us.peer_table.apply_datagram(datagram, "127.0.0.1", time.monotonic())


@pytest.fixture
def event_log(tmp_path):
    log = EventLog(tmp_path / "events.log")
    yield log
    log.close()


@pytest.fixture
def registry(tmp_path, event_log):
    return ShareRegistry(tmp_path / "shares.json", event_log)


@pytest.fixture
def daemon_factory(tmp_path):
    started: list[Daemon] = []

    def make(name: str = "node", **overrides) -> Daemon:
        defaults = dict(data_dir=tmp_path / name, display_name=name,
                        api_port=0, enable_discovery=False)
        defaults.update(overrides)
        daemon = Daemon(DaemonConfig(**defaults))
        daemon.start()
        started.append(daemon)
        return daemon

    yield make
    for daemon in started:
        daemon.stop()


@pytest.fixture
def two_daemons(daemon_factory):
    a = daemon_factory("alice")
    b = daemon_factory("bob")
    link_peers(a, b)
    return a, b
