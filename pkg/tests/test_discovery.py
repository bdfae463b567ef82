"""Peer discovery: announcements, table deltas, expiry, robustness."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peershare import events
from peershare.discovery import (Announcement, DatagramResult, PeerTable,
                                 make_announcement)
from peershare.events import EventLog
from peershare.identity import Identity

OWN = "f" * 32
NOW = 1000.0


def alive(peer_id="a" * 32, name="alice", port=5000, shares=3, **kwargs) -> bytes:
    return Announcement(peer_id=peer_id, name=name, port=port,
                        shares=shares, **kwargs).encode()


@pytest.fixture
def table():
    return PeerTable(OWN)


class TestAnnouncement:
    def test_round_trip(self):
        ann = make_announcement(Identity("a" * 32, "alice"), 5000, 3)
        assert Announcement.decode(ann.encode()) == ann

    def test_bye_round_trip(self):
        ann = make_announcement(Identity("a" * 32, "alice"), 5000, 0, kind="bye")
        decoded = Announcement.decode(ann.encode())
        assert decoded.kind == "bye"

    def test_wire_field_names_exact(self):
        doc = json.loads(alive())
        assert set(doc) == {"proto", "peer_id", "name", "port", "shares", "kind"}
        assert doc["proto"] == "peershare/1"
        assert doc["kind"] == "alive"

    @pytest.mark.parametrize("field,value", [
        ("proto", 7), ("peer_id", ""), ("name", None),
        ("port", 0), ("port", 80000), ("port", True),
        ("shares", -1), ("shares", "3"), ("kind", "hello"),
    ])
    def test_decode_rejects_bad_fields(self, field, value):
        doc = json.loads(alive())
        doc[field] = value
        with pytest.raises(ValueError):
            Announcement.decode(json.dumps(doc).encode())


class TestApplyDatagram:
    def test_first_alive_adds(self, table):
        assert table.apply_datagram(alive(), "10.0.0.2", NOW) is DatagramResult.ADDED
        (peer,) = table.peers()
        assert peer.peer_id == "a" * 32
        assert peer.last_seen == NOW

    def test_second_alive_refreshes_without_event(self, tmp_path):
        log = EventLog(tmp_path / "events.log")
        table = PeerTable(OWN, log)
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        assert table.apply_datagram(alive(shares=4), "10.0.0.2", NOW + 1) \
            is DatagramResult.REFRESHED
        (peer,) = table.peers()
        assert peer.last_seen == NOW + 1
        assert peer.share_count == 4
        assert len(log.read(what=events.PEER_JOINED)) == 1
        log.close()

    def test_address_comes_from_source_not_payload(self, table):
        table.apply_datagram(alive(port=5000), "192.168.1.9", NOW)
        (peer,) = table.peers()
        assert peer.address == "192.168.1.9"
        assert peer.port == 5000

    def test_refresh_updates_source_address(self, table):
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        table.apply_datagram(alive(), "10.0.0.7", NOW + 1)
        assert table.peers()[0].address == "10.0.0.7"

    def test_random_bytes_ignored_and_counted(self, table):
        assert table.apply_datagram(b"\x00\xfeghrj", "10.0.0.2", NOW) \
            is DatagramResult.IGNORED
        assert len(table) == 0
        assert table.malformed_count == 1

    def test_oversize_datagram_ignored(self, table):
        padded = alive(name="x" * 600)
        assert len(padded) > 512
        assert table.apply_datagram(padded, "10.0.0.2", NOW) is DatagramResult.IGNORED
        assert table.malformed_count == 1

    def test_wrong_proto_ignored_silently(self, table):
        doc = json.loads(alive())
        doc["proto"] = "otherapp/9"
        result = table.apply_datagram(json.dumps(doc).encode(), "10.0.0.2", NOW)
        assert result is DatagramResult.IGNORED
        assert table.malformed_count == 0

    def test_own_peer_id_never_enters_table(self, table):
        assert table.apply_datagram(alive(peer_id=OWN), "10.0.0.2", NOW) \
            is DatagramResult.IGNORED
        assert len(table) == 0

    def test_bye_removes_with_event(self, tmp_path):
        log = EventLog(tmp_path / "events.log")
        table = PeerTable(OWN, log)
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        assert table.apply_datagram(alive(kind="bye"), "10.0.0.2", NOW + 1) \
            is DatagramResult.REMOVED
        assert len(table) == 0
        assert len(log.read(what=events.PEER_LEFT)) == 1
        log.close()

    def test_bye_for_unknown_peer_ignored(self, table):
        assert table.apply_datagram(alive(kind="bye"), "10.0.0.2", NOW) \
            is DatagramResult.IGNORED

    def test_last_seen_never_decreases(self, table):
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        table.apply_datagram(alive(), "10.0.0.2", NOW - 50)
        assert table.peers()[0].last_seen == NOW


class TestExpiry:
    def test_beyond_timeout_removed(self, table):
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        removed = table.expire(NOW + 16, timeout=15)
        assert [p.peer_id for p in removed] == ["a" * 32]
        assert len(table) == 0

    def test_within_timeout_kept(self, table):
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        assert table.expire(NOW + 14, timeout=15) == []
        assert len(table) == 1

    def test_exactly_at_timeout_kept(self, table):
        # rule is strictly greater-than
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        assert table.expire(NOW + 15, timeout=15) == []

    def test_empty_table(self, table):
        assert table.expire(NOW, timeout=15) == []

    def test_expiry_emits_peer_left(self, tmp_path):
        log = EventLog(tmp_path / "events.log")
        table = PeerTable(OWN, log)
        table.apply_datagram(alive(), "10.0.0.2", NOW)
        table.expire(NOW + 100, timeout=15)
        assert len(log.read(what=events.PEER_LEFT)) == 1
        log.close()


peer_ids = st.text(alphabet="0123456789abcdef", min_size=8, max_size=32)


class TestProperties:
    @settings(max_examples=50, deadline=None)
    @given(peer_id=peer_ids, shares=st.integers(0, 100))
    def test_identical_alive_is_idempotent(self, peer_id, shares):
        table = PeerTable(OWN)
        datagram = alive(peer_id=peer_id, shares=shares)
        first = table.apply_datagram(datagram, "10.0.0.2", NOW)
        before = [(p.peer_id, p.share_count, p.address) for p in table.peers()]
        second = table.apply_datagram(datagram, "10.0.0.2", NOW + 1)
        after = [(p.peer_id, p.share_count, p.address) for p in table.peers()]
        if peer_id == OWN:
            assert first is second is DatagramResult.IGNORED
        else:
            assert (first, second) == (DatagramResult.ADDED, DatagramResult.REFRESHED)
            assert before == after
            assert table.peers()[0].last_seen == NOW + 1

    @settings(max_examples=50, deadline=None)
    @given(existing=st.lists(peer_ids, unique=True, max_size=5), new=peer_ids)
    def test_bye_after_alive_restores_size(self, existing, new):
        table = PeerTable(OWN)
        for pid in existing:
            table.apply_datagram(alive(peer_id=pid), "10.0.0.2", NOW)
        size_before = len(table)
        table.apply_datagram(alive(peer_id=new), "10.0.0.3", NOW + 1)
        table.apply_datagram(alive(peer_id=new, kind="bye"), "10.0.0.3", NOW + 2)
        if new == OWN:
            assert len(table) == size_before
        else:
            assert len(table) == len([p for p in existing if p != new])

    @settings(max_examples=30, deadline=None)
    @given(ages=st.lists(st.floats(0, 60), max_size=8))
    def test_no_expired_peer_survives_expire(self, ages):
        table = PeerTable(OWN)
        for i, age in enumerate(ages):
            pid = f"{i:032x}"
            table.apply_datagram(alive(peer_id=pid), "10.0.0.2", NOW - age)
        table.expire(NOW, timeout=15)
        assert all(NOW - p.last_seen <= 15 for p in table.peers())
