#!/usr/bin/env python3
"""Print the full action x mode decision matrix and the capability texts."""

from __future__ import annotations

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from peershare.feedback import describe_share
from peershare.registry import Action, PermissionMode, ShareEntry, authorize

MODES = [PermissionMode.READ, PermissionMode.WRITE, PermissionMode.FULL]
ACTIONS = [Action.LIST, Action.GET, Action.PUT, Action.DELETE]


def main() -> int:
    header = f"{'action':<8}" + "".join(f"{m.value:>8}" for m in MODES)
    print(header)
    print("-" * len(header))
    for action in ACTIONS:
        cells = "".join(
            f"{'allow' if authorize(action, mode) else 'DENY':>8}" for mode in MODES)
        print(f"{action.value:<8}{cells}")

    print("\nwhat the owner is told at each mode:\n")
    for mode in MODES:
        entry = ShareEntry(share_id="demo", path="/tmp/example.txt",
                           display_name="example.txt", mode=mode, size_bytes=0,
                           created_at="", modified_at="")
        message = describe_share(entry)
        print(f"[{message.severity}] {message.headline}")
        for capability in message.capabilities:
            print(f"    - {capability.text}")
        print()
    return 0


if __name__ == "__main__":
    sys.exit(main())
