"""Share registry: the enforcement table, entry lifecycle, persistence."""

from __future__ import annotations

import json
import os

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from peershare import events
from peershare.registry import (ALLOWED_ACTIONS, Action, AlreadyShared, NotAFile,
                                PathNotFound, PermissionMode, ShareEntry,
                                ShareRegistry, UnknownShare, authorize)
from peershare.util import parse_rfc3339

# The full 12-cell decision table: every (action, mode) pair, frozen.
ENFORCEMENT_ORACLE = {
    (Action.LIST, PermissionMode.READ): True,
    (Action.LIST, PermissionMode.WRITE): True,
    (Action.LIST, PermissionMode.FULL): True,
    (Action.GET, PermissionMode.READ): True,
    (Action.GET, PermissionMode.WRITE): True,
    (Action.GET, PermissionMode.FULL): True,
    (Action.PUT, PermissionMode.READ): False,
    (Action.PUT, PermissionMode.WRITE): True,
    (Action.PUT, PermissionMode.FULL): True,
    (Action.DELETE, PermissionMode.READ): False,
    (Action.DELETE, PermissionMode.WRITE): False,
    (Action.DELETE, PermissionMode.FULL): True,
}

MODES = [PermissionMode.READ, PermissionMode.WRITE, PermissionMode.FULL]
ACTIONS = [Action.LIST, Action.GET, Action.PUT, Action.DELETE]


class TestAuthorize:
    def test_oracle_table_is_exhaustive(self):
        assert set(ENFORCEMENT_ORACLE) == {(a, m) for a in ACTIONS for m in MODES}

    @pytest.mark.parametrize("action,mode", sorted(ENFORCEMENT_ORACLE,
                                                   key=lambda k: (k[0].value, k[1].value)))
    def test_matches_oracle(self, action, mode):
        assert authorize(action, mode) is ENFORCEMENT_ORACLE[(action, mode)]

    def test_mode_order_is_total(self):
        assert PermissionMode.READ < PermissionMode.WRITE < PermissionMode.FULL
        assert PermissionMode.FULL > PermissionMode.READ

    def test_allowed_sets_strictly_nested(self):
        read, write, full = (ALLOWED_ACTIONS[m] for m in MODES)
        assert read < write < full  # proper subsets

    @given(action=st.sampled_from(ACTIONS),
           lo=st.sampled_from(MODES), hi=st.sampled_from(MODES))
    def test_monotonic_in_mode(self, action, lo, hi):
        if lo <= hi and authorize(action, lo):
            assert authorize(action, hi)

    def test_mutating_actions(self):
        from peershare.registry import MUTATING_ACTIONS
        assert MUTATING_ACTIONS == {Action.PUT, Action.DELETE}
        assert Action.LIST not in MUTATING_ACTIONS
        assert Action.GET not in MUTATING_ACTIONS


class TestAddShare:
    def test_basic_fields(self, registry, tmp_path):
        f = tmp_path / "report.pdf"
        f.write_bytes(b"x" * 100)
        entry = registry.add_share(f, PermissionMode.READ)
        assert entry.display_name == "report.pdf"
        assert entry.mode is PermissionMode.READ
        assert entry.size_bytes == 100
        assert entry.path == str(f)
        assert len(entry.share_id) == 32
        int(entry.share_id, 16)  # lowercase hex
        # timestamps must parse as RFC 3339 with a timezone
        assert parse_rfc3339(entry.created_at).tzinfo is not None
        assert parse_rfc3339(entry.modified_at).tzinfo is not None

    def test_default_mode_is_read(self, registry, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        assert registry.add_share(f).mode is PermissionMode.READ

    def test_duplicate_path_rejected(self, registry, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        registry.add_share(f)
        with pytest.raises(AlreadyShared):
            registry.add_share(f)

    def test_duplicate_via_symlink_rejected(self, registry, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        link = tmp_path / "alias.txt"
        os.symlink(f, link)
        registry.add_share(f)
        with pytest.raises(AlreadyShared):
            registry.add_share(link)

    def test_missing_path(self, registry, tmp_path):
        with pytest.raises(PathNotFound):
            registry.add_share(tmp_path / "nope.txt")

    def test_directory_rejected(self, registry, tmp_path):
        with pytest.raises(NotAFile):
            registry.add_share(tmp_path)

    def test_emits_share_added_event(self, registry, event_log, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        entry = registry.add_share(f, PermissionMode.WRITE)
        (record,) = event_log.read(what=events.SHARE_ADDED)
        assert record.outcome == events.INFO
        assert record.share_id == entry.share_id
        assert record.share_name == "f.txt"
        assert record.peer_id == events.LOCAL_ACTOR
        assert "write" in record.detail


class TestSetMode:
    def test_updates_and_records_transition(self, registry, event_log, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        entry = registry.add_share(f, PermissionMode.READ)
        updated = registry.set_mode(entry.share_id, PermissionMode.FULL)
        assert updated.mode is PermissionMode.FULL
        assert registry.get(entry.share_id).mode is PermissionMode.FULL
        (record,) = event_log.read(what=events.MODE_CHANGED)
        assert "read" in record.detail and "full" in record.detail

    def test_same_mode_still_emits_event(self, registry, event_log, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        entry = registry.add_share(f, PermissionMode.READ)
        registry.set_mode(entry.share_id, PermissionMode.READ)
        (record,) = event_log.read(what=events.MODE_CHANGED)
        assert "read" in record.detail

    def test_unknown_share(self, registry):
        with pytest.raises(UnknownShare):
            registry.set_mode("missing", PermissionMode.WRITE)


class TestRemoveShare:
    def test_removes_entry_keeps_file(self, registry, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        entry = registry.add_share(f)
        removed = registry.remove_share(entry.share_id)
        assert removed.share_id == entry.share_id
        assert registry.list_shares() == []
        assert f.exists()

    def test_remove_twice(self, registry, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        entry = registry.add_share(f)
        registry.remove_share(entry.share_id)
        with pytest.raises(UnknownShare):
            registry.remove_share(entry.share_id)


class TestListShares:
    def test_empty(self, registry):
        assert registry.list_shares() == []

    def test_creation_order(self, registry, tmp_path):
        names = ["a.txt", "b.txt", "c.txt"]
        ids = []
        for name in names:
            f = tmp_path / name
            f.write_text(name)
            ids.append(registry.add_share(f).share_id)
        assert [e.share_id for e in registry.list_shares()] == ids

    def test_order_preserved_after_middle_removal(self, registry, tmp_path):
        ids = []
        for name in ["a.txt", "b.txt", "c.txt"]:
            f = tmp_path / name
            f.write_text(name)
            ids.append(registry.add_share(f).share_id)
        registry.remove_share(ids[1])
        assert [e.share_id for e in registry.list_shares()] == [ids[0], ids[2]]


class TestInvariants:
    def test_every_mutation_emits_exactly_one_event(self, registry, event_log, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        before = event_log.count
        entry = registry.add_share(f)
        assert event_log.count == before + 1
        registry.set_mode(entry.share_id, PermissionMode.FULL)
        assert event_log.count == before + 2
        registry.remove_share(entry.share_id)
        assert event_log.count == before + 3

    @settings(max_examples=30, deadline=None)
    @given(script=st.lists(st.tuples(st.sampled_from(["add", "remove"]),
                                     st.integers(0, 7)), max_size=25))
    def test_no_duplicate_ids_or_paths_after_any_script(self, tmp_path_factory, script):
        tmp_path = tmp_path_factory.mktemp("reg")
        from peershare.events import EventLog
        log = EventLog(tmp_path / "events.log")
        registry = ShareRegistry(tmp_path / "shares.json", log)
        try:
            files = []
            for i in range(8):
                f = tmp_path / f"f{i}.txt"
                f.write_text(str(i))
                files.append(f)
            shared: dict[int, str] = {}
            for op, i in script:
                if op == "add":
                    if i in shared:
                        with pytest.raises(AlreadyShared):
                            registry.add_share(files[i])
                    else:
                        shared[i] = registry.add_share(files[i]).share_id
                elif i in shared:
                    registry.remove_share(shared.pop(i))
            entries = registry.list_shares()
            ids = [e.share_id for e in entries]
            paths = [e.path for e in entries]
            assert len(set(ids)) == len(ids)
            assert len(set(paths)) == len(paths)
            assert len(entries) == len(shared)
        finally:
            log.close()


class TestPersistence:
    def test_shares_json_exact_field_names(self, registry, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hello")
        entry = registry.add_share(f, PermissionMode.WRITE)
        doc = json.loads((tmp_path / "shares.json").read_text())
        assert isinstance(doc, list) and len(doc) == 1
        assert set(doc[0]) == {"share_id", "path", "display_name", "mode",
                               "size_bytes", "created_at", "modified_at"}
        assert doc[0]["mode"] == "write"
        assert doc[0]["share_id"] == entry.share_id
        assert doc[0]["size_bytes"] == 5

    def test_reload_round_trip(self, registry, event_log, tmp_path):
        for name in ["a.txt", "b.txt"]:
            f = tmp_path / name
            f.write_text(name)
            registry.add_share(f)
        reloaded = ShareRegistry(tmp_path / "shares.json", event_log)
        assert reloaded.list_shares() == registry.list_shares()

    def test_rewritten_on_every_mutation(self, registry, tmp_path):
        store = tmp_path / "shares.json"
        f = tmp_path / "f.txt"
        f.write_text("hi")
        entry = registry.add_share(f)
        assert json.loads(store.read_text())[0]["mode"] == "read"
        registry.set_mode(entry.share_id, PermissionMode.FULL)
        assert json.loads(store.read_text())[0]["mode"] == "full"
        registry.remove_share(entry.share_id)
        assert json.loads(store.read_text()) == []

    def test_entry_dict_round_trip(self, registry, tmp_path):
        f = tmp_path / "f.txt"
        f.write_text("hi")
        entry = registry.add_share(f, PermissionMode.FULL)
        assert ShareEntry.from_dict(entry.to_dict()) == entry
