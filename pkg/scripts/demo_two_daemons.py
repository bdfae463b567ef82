#!/usr/bin/env python3
"""Two loopback daemons sharing files with each other, end to end.

Spins up "alice" and "bob" with unicast discovery, lets them find each
other, then walks through the share modes: a read-only get, a blocked
delete, a write-mode replacement, and a full-mode delete. Finishes by
printing alice's event feed the way the dashboard renders it.
"""

from __future__ import annotations

import socket
import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from peershare import Daemon, DaemonConfig, DiscoveryConfig, PermissionMode
from peershare.client import RemoteError, delete_remote, get_remote, put_remote
from peershare.feedback import describe_event, describe_share


def free_udp_port() -> int:
    s = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
    s.bind(("127.0.0.1", 0))
    port = s.getsockname()[1]
    s.close()
    return port


def main() -> int:
    workdir = Path(tempfile.mkdtemp(prefix="peershare-demo-"))
    port_a, port_b = free_udp_port(), free_udp_port()

    def config(name: str, mine: int, theirs: int) -> DaemonConfig:
        return DaemonConfig(
            data_dir=workdir / name, display_name=name, api_port=0,
            discovery=DiscoveryConfig(port=mine, enable_multicast=False,
                                      announce_interval=0.5, expiry_timeout=2.0,
                                      unicast_targets=(("127.0.0.1", theirs),)))

    alice = Daemon(config("alice", port_a, port_b))
    bob = Daemon(config("bob", port_b, port_a))
    alice.start()
    bob.start()
    print(f"alice: protocol={alice.peer_server.port} api={alice.api_server.port}")
    print(f"bob:   protocol={bob.peer_server.port} api={bob.api_server.port}")

    try:
        deadline = time.time() + 5
        while time.time() < deadline and not (len(alice.peer_table) and len(bob.peer_table)):
            time.sleep(0.05)
        print(f"\ndiscovered each other in under "
              f"{5 - (deadline - time.time()):.1f}s\n")

        secret = workdir / "alice" / "quarterly-report.txt"
        secret.write_text("the numbers are fine, mostly\n" * 40)
        entry = alice.registry.add_share(secret, PermissionMode.READ)
        print("alice shares a file read-only; instant feedback says:")
        message = describe_share(entry)
        print(f"  {message.headline}")
        for capability in message.capabilities:
            print(f"    - {capability.text}")

        dest = workdir / "bob" / "fetched.txt"
        get_remote("127.0.0.1", alice.peer_server.port, bob.identity,
                   entry.share_id, str(dest))
        print(f"\nbob copied the file ({dest.stat().st_size} bytes)")

        try:
            delete_remote("127.0.0.1", alice.peer_server.port, bob.identity,
                          entry.share_id)
        except RemoteError as exc:
            print(f"bob tried to delete it and was blocked: {exc.code}")

        alice.registry.set_mode(entry.share_id, PermissionMode.WRITE)
        edited = workdir / "bob" / "edited.txt"
        edited.write_text("bob's corrections\n")
        put_remote("127.0.0.1", alice.peer_server.port, bob.identity,
                   entry.share_id, str(edited))
        print("alice raised the mode to write; bob replaced the content")

        alice.registry.set_mode(entry.share_id, PermissionMode.FULL)
        delete_remote("127.0.0.1", alice.peer_server.port, bob.identity,
                      entry.share_id)
        print(f"alice raised it to full; bob deleted it; "
              f"file exists: {secret.exists()}")

        print("\nalice's event feed (what the dashboard shows):")
        for record in alice.event_log.read():
            print(f"  #{record.seq:<3} [{record.outcome:<7}] {describe_event(record)}")
    finally:
        alice.stop()
        bob.stop()
    print(f"\nstate kept under {workdir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
