"""Command-line client for the daemon's local API, plus the daemon runner.

Exit codes: 0 success, 1 operational error, 2 usage error. Destructive
subcommands (unshare, put, delete) refuse to do anything at all without
--confirm: no request is sent, nothing reaches the wire.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
import threading
from pathlib import Path

import requests

from .daemon import DEFAULT_API_PORT, Daemon, DaemonConfig
from .discovery import DiscoveryConfig
from .events import EventRecord
from .feedback import describe_event

SEVERITY_MARKS = {"info": "", "caution": "CAUTION: ", "danger": "DANGER: "}


class CliError(Exception):
    """Operational failure; message goes to stderr, exit code 1."""


def _api_port(args) -> int:
    env = os.environ.get("PEERSHARE_API_PORT")
    return int(env) if env else args.api_port


def _request(args, method: str, path: str, *, body: dict | None = None,
             params: dict | None = None, stream: bool = False) -> requests.Response:
    url = f"http://127.0.0.1:{_api_port(args)}{path}"
    try:
        resp = requests.request(method, url, json=body, params=params,
                                stream=stream, timeout=None if stream else 60)
    except requests.RequestException as exc:
        raise CliError(f"cannot reach the peershare daemon on port {_api_port(args)} "
                       f"({exc.__class__.__name__}); is it running?") from exc
    if resp.status_code >= 400:
        try:
            error = resp.json().get("error", {})
            detail = f"{error.get('code', resp.status_code)}: {error.get('message', '')}"
        except ValueError:
            detail = f"HTTP {resp.status_code}"
        raise CliError(detail)
    return resp


def _print_feedback(feedback: dict) -> None:
    mark = SEVERITY_MARKS.get(feedback.get("severity", ""), "")
    print(f"{mark}{feedback['headline']}")
    for capability in feedback.get("capabilities", []):
        print(f"  - {capability['text']}")


def _resolve_peer(args, ref: str) -> dict:
    peers = _request(args, "GET", "/v1/peers").json()["peers"]
    exact = [p for p in peers if p["peer_id"] == ref]
    if exact:
        return exact[0]
    matches = [p for p in peers if p["peer_id"].startswith(ref) or p["name"] == ref]
    if len(matches) == 1:
        return matches[0]
    if not matches:
        raise CliError(f"no known peer matches {ref!r} (try `peershare peers`)")
    raise CliError(f"{ref!r} is ambiguous: matches "
                   + ", ".join(p["peer_id"][:12] for p in matches))


# ── subcommands ──────────────────────────────────────────────────


def cmd_daemon(args) -> int:
    logging.basicConfig(level=getattr(logging, args.log_level.upper()),
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    data_dir = os.environ.get("PEERSHARE_DATA_DIR") or args.data_dir
    unicast = []
    for target in args.unicast:
        host, _, port = target.rpartition(":")
        if not host or not port.isdigit():
            print(f"error: --unicast expects HOST:PORT, got {target!r}", file=sys.stderr)
            return 2
        unicast.append((host, int(port)))
    config = DaemonConfig(
        data_dir=Path(data_dir).expanduser(),
        display_name=args.name,
        protocol_port=args.port,
        api_port=_api_port(args),
        discovery=DiscoveryConfig(
            port=args.discovery_port,
            announce_interval=args.announce_interval,
            expiry_timeout=args.expiry_timeout,
            enable_multicast=not args.no_multicast,
            unicast_targets=tuple(unicast),
        ),
        static_dir=Path(args.static_dir) if args.static_dir else None,
    )
    daemon = Daemon(config)
    daemon.start()
    print(f"peershare daemon up: peer_id={daemon.identity.peer_id} "
          f"protocol_port={daemon.peer_server.port} "
          f"api=http://127.0.0.1:{daemon.api_server.port}", flush=True)

    stop = threading.Event()
    signal.signal(signal.SIGINT, lambda *_: stop.set())
    signal.signal(signal.SIGTERM, lambda *_: stop.set())
    stop.wait()
    daemon.stop()
    return 0


def cmd_share(args) -> int:
    body = {"path": os.path.abspath(args.path), "mode": args.mode}
    data = _request(args, "POST", "/v1/shares", body=body).json()
    print(f"share_id: {data['share']['share_id']}")
    _print_feedback(data["feedback"])
    return 0


def cmd_unshare(args) -> int:
    if not args.confirm:
        print("refusing to unshare without --confirm", file=sys.stderr)
        return 2
    data = _request(args, "DELETE", f"/v1/shares/{args.share_id}",
                    params={"confirm": "true"}).json()
    print(f"no longer sharing \"{data['share']['display_name']}\" "
          f"(file kept at {data['share']['path']})")
    return 0


def cmd_shares(args) -> int:
    shares = _request(args, "GET", "/v1/shares").json()["shares"]
    if not shares:
        print("no shares")
        return 0
    for share in shares:
        print(f"{share['share_id']}  [{share['mode']:<5}]  "
              f"{share['size_bytes']:>10}  {share['display_name']}")
    return 0


def cmd_peers(args) -> int:
    peers = _request(args, "GET", "/v1/peers").json()["peers"]
    if not peers:
        print("no peers discovered")
        return 0
    for peer in peers:
        print(f"{peer['peer_id'][:12]}  {peer['name']:<20}  "
              f"{peer['address']}:{peer['port']}  shares={peer['share_count']}  "
              f"seen {peer['last_seen_age']:.0f}s ago")
    return 0


def cmd_browse(args) -> int:
    peer = _resolve_peer(args, args.peer)
    files = _request(args, "GET", f"/v1/peers/{peer['peer_id']}/files").json()["files"]
    if not files:
        print(f"{peer['name']} shares nothing")
        return 0
    for f in files:
        print(f"{f['share_id']}  [{f['mode']:<5}]  {f['size_bytes']:>10}  "
              f"{f['display_name']}")
    return 0


def cmd_get(args) -> int:
    peer = _resolve_peer(args, args.peer)
    body = {"peer_id": peer["peer_id"], "action": "get", "share_id": args.share_id,
            "local_path": os.path.abspath(args.dest)}
    data = _request(args, "POST", "/v1/transfers", body=body).json()
    print(f"saved {data['size_bytes']} bytes to {data['saved_to']}")
    return 0


def cmd_put(args) -> int:
    if not args.confirm:
        print("put replaces the file on the OWNER's machine; "
              "re-run with --confirm to proceed", file=sys.stderr)
        return 2
    peer = _resolve_peer(args, args.peer)
    body = {"peer_id": peer["peer_id"], "action": "put", "share_id": args.share_id,
            "local_path": os.path.abspath(args.src), "confirm": True}
    data = _request(args, "POST", "/v1/transfers", body=body).json()
    print(f"replaced remote content with {data['size_bytes']} bytes")
    return 0


def cmd_delete(args) -> int:
    if not args.confirm:
        print("delete removes the file from the OWNER's machine; "
              "re-run with --confirm to proceed", file=sys.stderr)
        return 2
    peer = _resolve_peer(args, args.peer)
    body = {"peer_id": peer["peer_id"], "action": "delete",
            "share_id": args.share_id, "confirm": True}
    _request(args, "POST", "/v1/transfers", body=body)
    print(f"deleted {args.share_id} from {peer['name']}")
    return 0


def _print_event(record: EventRecord) -> None:
    print(f"{record.when}  #{record.seq:<5} {describe_event(record)}", flush=True)


def cmd_events(args) -> int:
    if not args.follow:
        data = _request(args, "GET", "/v1/events", params={"since": args.since}).json()
        for item in data["events"]:
            _print_event(EventRecord.from_dict(item))
        return 0
    resp = _request(args, "GET", "/v1/events/stream",
                    params={"since": args.since}, stream=True)
    try:
        for line in resp.iter_lines(decode_unicode=True):
            if not line or line.startswith(":"):
                continue  # heartbeat
            _print_event(EventRecord.from_dict(json.loads(line)))
    except KeyboardInterrupt:
        pass
    finally:
        resp.close()
    return 0


# ── argument parsing ─────────────────────────────────────────────


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peershare",
        description="Share files on your LAN with visible, enforced permissions.")
    parser.add_argument("--api-port", type=int, default=DEFAULT_API_PORT,
                        help="daemon API port (env PEERSHARE_API_PORT overrides)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("daemon", help="run the sharing daemon")
    p.add_argument("--data-dir", default="~/.peershare",
                   help="state directory (env PEERSHARE_DATA_DIR overrides)")
    p.add_argument("--port", type=int, default=0,
                   help="protocol listener port (default: ephemeral, advertised)")
    p.add_argument("--name", default=os.uname().nodename if hasattr(os, "uname") else "peershare",
                   help="display name announced to peers")
    p.add_argument("--discovery-port", type=int, default=40404)
    p.add_argument("--announce-interval", type=float, default=5.0)
    p.add_argument("--expiry-timeout", type=float, default=15.0)
    p.add_argument("--no-multicast", action="store_true",
                   help="disable multicast announcements (use --unicast targets)")
    p.add_argument("--unicast", action="append", default=[], metavar="HOST:PORT",
                   help="also announce to this address (repeatable)")
    p.add_argument("--static-dir", default=None,
                   help="serve the dashboard from this directory")
    p.add_argument("--log-level", default="info",
                   choices=["debug", "info", "warning", "error"])
    p.set_defaults(func=cmd_daemon)

    p = sub.add_parser("share", help="share a local file")
    p.add_argument("path")
    p.add_argument("--mode", choices=["read", "write", "full"], default="read",
                   help="permission mode (default: read)")
    p.set_defaults(func=cmd_share)

    p = sub.add_parser("unshare", help="stop sharing (local file is kept)")
    p.add_argument("share_id")
    p.add_argument("--confirm", action="store_true")
    p.set_defaults(func=cmd_unshare)

    p = sub.add_parser("shares", help="list local shares")
    p.set_defaults(func=cmd_shares)

    p = sub.add_parser("peers", help="list discovered peers")
    p.set_defaults(func=cmd_peers)

    p = sub.add_parser("browse", help="list a peer's shared files")
    p.add_argument("peer", help="peer id, unique id prefix, or display name")
    p.set_defaults(func=cmd_browse)

    p = sub.add_parser("get", help="copy a peer's shared file here")
    p.add_argument("peer")
    p.add_argument("share_id")
    p.add_argument("dest")
    p.set_defaults(func=cmd_get)

    p = sub.add_parser("put", help="replace a peer's shared file content")
    p.add_argument("peer")
    p.add_argument("share_id")
    p.add_argument("src")
    p.add_argument("--confirm", action="store_true")
    p.set_defaults(func=cmd_put)

    p = sub.add_parser("delete", help="delete a shared file from its owner")
    p.add_argument("peer")
    p.add_argument("share_id")
    p.add_argument("--confirm", action="store_true")
    p.set_defaults(func=cmd_delete)

    p = sub.add_parser("events", help="show the security event log")
    p.add_argument("--since", type=int, default=0)
    p.add_argument("--follow", action="store_true", help="stream live events")
    p.set_defaults(func=cmd_events)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        return 1


if __name__ == "__main__":
    sys.exit(main())
