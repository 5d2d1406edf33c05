"""Permission scoping and run-time autonomy adjustment."""

import pytest

from hotl.autonomy import (
    Permission,
    PermissionChange,
    PermissionTable,
    UnknownPermission,
    UnresolvableScope,
)


def table():
    t = PermissionTable(
        vocabulary={"auto_rtl", "act_as_replacement", "track_without_confirmation"},
        constrained_keys={"track_without_confirmation"},
    )
    t.mission["act_as_replacement"] = Permission("act_as_replacement", True)
    t.mission["track_without_confirmation"] = Permission(
        "track_without_confirmation", True, constraint=0.6
    )
    return t


def change(key, granted, scope_kind="mission", scope_id=None, constraint=None):
    return PermissionChange(
        key=key,
        granted=granted,
        scope_kind=scope_kind,
        scope_id=scope_id,
        issuer="op1",
        tick=0,
        constraint=constraint,
    )


def test_agent_scope_overrides_mission():
    t = table()
    t.apply(change("act_as_replacement", False, "agent", "uav3"), {"uav3"}, {"track"})
    assert not t.resolve("uav3", "track", "act_as_replacement").granted
    assert t.resolve("uav2", "track", "act_as_replacement").granted


def test_mission_scope_only():
    t = table()
    assert t.resolve("uav1", "track", "track_without_confirmation").constraint == 0.6


def test_role_scope_fans_out_to_all_agents_with_role():
    t = table()
    t.apply(change("auto_rtl", False, "role", "track"), {"uav1", "uav2"}, {"track"})
    assert not t.resolve("uav1", "track", "auto_rtl").granted
    assert not t.resolve("uav2", "track", "auto_rtl").granted
    assert t.resolve("uav3", "search", "auto_rtl").granted


def test_agent_beats_role_beats_mission():
    t = table()
    t.apply(change("auto_rtl", False, "role", "track"), {"uav1"}, {"track"})
    t.apply(change("auto_rtl", True, "agent", "uav1"), {"uav1"}, {"track"})
    assert t.resolve("uav1", "track", "auto_rtl").granted


def test_undeclared_key_defaults_to_granted():
    t = table()
    assert t.resolve("uav1", "track", "auto_rtl").granted


def test_unknown_key_rejected():
    t = table()
    with pytest.raises(UnknownPermission):
        t.resolve("uav1", "track", "warp_drive")
    with pytest.raises(UnknownPermission):
        t.apply(change("warp_drive", True), set(), set())


def test_unresolvable_scope_rejected():
    t = table()
    with pytest.raises(UnresolvableScope):
        t.apply(change("auto_rtl", False, "agent", "uav9"), {"uav1"}, {"track"})


def test_change_returns_old_and_new():
    t = table()
    old, new = t.apply(change("act_as_replacement", False), {"uav1"}, set())
    assert old["granted"] is True and new["granted"] is False
