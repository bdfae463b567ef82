"""peershare: LAN peer-to-peer file sharing with visible security state.

Files are shared at one of three strictly ordered modes (read < write <
full), every access attempt is enforced at the wire and recorded as a
what/when/where/who event, and every sharing action returns an instant
human-readable description of its consequences.
"""

from .client import ConnectFailed, RemoteError, perform_remote
from .daemon import Daemon, DaemonConfig
from .discovery import Announcement, DiscoveryConfig, PeerInfo, PeerTable
from .events import EventLog, EventRecord
from .feedback import FeedbackMessage, describe_event, describe_share
from .registry import (Action, PermissionMode, ShareEntry, ShareRegistry,
                       authorize)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "Announcement",
    "ConnectFailed",
    "Daemon",
    "DaemonConfig",
    "DiscoveryConfig",
    "EventLog",
    "EventRecord",
    "FeedbackMessage",
    "PeerInfo",
    "PeerTable",
    "PermissionMode",
    "RemoteError",
    "ShareEntry",
    "ShareRegistry",
    "authorize",
    "describe_event",
    "describe_share",
    "perform_remote",
    "__version__",
]
