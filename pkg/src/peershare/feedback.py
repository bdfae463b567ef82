"""Human-readable consequence descriptions for sharing actions and events.

Every message carries machine-readable capability tags next to the prose so
tests can check capability-set fidelity without parsing English. All
user-facing strings live in the tables below (English only for now).
"""

from __future__ import annotations

from dataclasses import dataclass

from . import events
from .events import EventRecord
from .registry import ALLOWED_ACTIONS, Action, PermissionMode, ShareEntry

SEVERITY_INFO = "info"
SEVERITY_CAUTION = "caution"
SEVERITY_DANGER = "danger"

#: Severity is a function of mode only.
SEVERITY_BY_MODE = {
    PermissionMode.READ: SEVERITY_INFO,
    PermissionMode.WRITE: SEVERITY_CAUTION,
    PermissionMode.FULL: SEVERITY_DANGER,
}

# Stable presentation order for capability sentences.
_CAPABILITY_ORDER = [Action.LIST, Action.GET, Action.PUT, Action.DELETE]

_CAPABILITY_TEXT = {
    Action.LIST: 'Everyone on your network can see that "{name}" is shared.',
    Action.GET: 'Everyone on your network can view and copy "{name}" to their own machine.',
    Action.PUT: 'Everyone on your network can replace the content of "{name}" on your machine.',
    Action.DELETE: 'Everyone on your network can delete "{name}" from your machine.',
}

_HEADLINE = {
    PermissionMode.READ: '"{name}" is shared read-only.',
    PermissionMode.WRITE: '"{name}" is shared with write access.',
    PermissionMode.FULL: '"{name}" is shared with FULL control, including deletion.',
}


@dataclass(frozen=True)
class Capability:
    tag: str
    text: str


@dataclass(frozen=True)
class FeedbackMessage:
    headline: str
    capabilities: tuple[Capability, ...]
    severity: str

    def capability_tags(self) -> set[str]:
        return {c.tag for c in self.capabilities}

    def to_dict(self) -> dict:
        return {
            "headline": self.headline,
            "capabilities": [{"tag": c.tag, "text": c.text} for c in self.capabilities],
            "severity": self.severity,
        }


def describe_share(entry: ShareEntry) -> FeedbackMessage:
    """One capability sentence per action allowed by the entry's mode, no more."""
    allowed = ALLOWED_ACTIONS[entry.mode]
    capabilities = tuple(
        Capability(tag=action.value, text=_CAPABILITY_TEXT[action].format(name=entry.display_name))
        for action in _CAPABILITY_ORDER
        if action in allowed
    )
    return FeedbackMessage(
        headline=_HEADLINE[entry.mode].format(name=entry.display_name),
        capabilities=capabilities,
        severity=SEVERITY_BY_MODE[entry.mode],
    )


_ACCESS_VERBS = {
    # what -> (allowed sentence, denied sentence)
    events.LIST: ("{who} browsed your shared files",
                  "{who} was blocked from browsing your shared files"),
    events.GET: ('{who} copied "{share}"',
                 '{who} was blocked from copying "{share}"'),
    events.PUT: ('{who} replaced the content of "{share}"',
                 '{who} was blocked from replacing the content of "{share}"'),
    events.DELETE: ('{who} deleted "{share}" from this machine',
                    '{who} was blocked from deleting "{share}"'),
}


def describe_event(event: EventRecord) -> str:
    """One plain-language line: who did what to which share, and whether it was blocked."""
    who = "you" if event.peer_id == events.LOCAL_ACTOR else (event.peer_name or event.peer_id or "someone")
    share = event.share_name or event.share_id

    if event.what in _ACCESS_VERBS:
        allowed_text, denied_text = _ACCESS_VERBS[event.what]
        template = allowed_text if event.outcome == events.ALLOWED else denied_text
        return template.format(who=who, share=share)
    if event.what == events.SHARE_ADDED:
        return f'{who} shared "{share}" ({event.detail})'
    if event.what == events.SHARE_REMOVED:
        return f'{who} stopped sharing "{share}"'
    if event.what == events.MODE_CHANGED:
        return f'{who} changed sharing of "{share}" ({event.detail})'
    if event.what == events.PEER_JOINED:
        return f"{who} appeared on the network"
    if event.what == events.PEER_LEFT:
        return f"{who} left the network"
    if event.what == events.MALFORMED:
        suffix = f": {event.detail}" if event.detail else ""
        return f"a malformed request was received from {who}{suffix}"
    return f"{who}: {event.what} {event.detail}".strip()
