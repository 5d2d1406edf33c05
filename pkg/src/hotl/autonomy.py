"""Roles, permissions, and run-time autonomy adjustment.

Autonomy levels are represented extensionally: a role or agent holds a
set of named permissions, optionally carrying one scalar constraint
(e.g. a confidence threshold). Operators raise or lower autonomy by
flipping these switches at agent, role, or mission scope; resolution
precedence is agent > role > mission.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class UnknownPermission(KeyError):
    pass


class UnresolvableScope(ValueError):
    pass


@dataclass(frozen=True)
class Permission:
    key: str
    granted: bool
    constraint: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"key": self.key, "granted": self.granted}
        if self.constraint is not None:
            d["constraint"] = self.constraint
        return d


@dataclass(frozen=True)
class Role:
    name: str
    permissions: dict[str, Permission] = field(default_factory=dict)


@dataclass(frozen=True)
class PermissionChange:
    key: str
    granted: bool
    scope_kind: str  # agent | role | mission
    scope_id: str | None  # agent-id or role-name; None for mission scope
    issuer: str
    tick: int
    constraint: float | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "key": self.key,
            "granted": self.granted,
            "scope_kind": self.scope_kind,
            "issuer": self.issuer,
            "tick": self.tick,
        }
        if self.scope_id is not None:
            d["scope_id"] = self.scope_id
        if self.constraint is not None:
            d["constraint"] = self.constraint
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PermissionChange":
        return cls(
            key=d["key"],
            granted=d["granted"],
            scope_kind=d["scope_kind"],
            scope_id=d.get("scope_id"),
            issuer=d.get("issuer", "operator"),
            tick=d.get("tick", 0),
            constraint=d.get("constraint"),
        )


@dataclass
class PermissionTable:
    """Effective permission state: mission defaults plus scoped overrides."""

    vocabulary: set[str]
    constrained_keys: set[str] = field(default_factory=set)
    mission: dict[str, Permission] = field(default_factory=dict)
    by_role: dict[tuple[str, str], Permission] = field(default_factory=dict)
    by_agent: dict[tuple[str, str], Permission] = field(default_factory=dict)

    def resolve(self, agent_id: str, role_name: str, key: str) -> Permission:
        """Most specific defined value wins: agent > role > mission."""
        if key not in self.vocabulary:
            raise UnknownPermission(key)
        for table, scope in ((self.by_agent, agent_id), (self.by_role, role_name)):
            p = table.get((scope, key))
            if p is not None:
                return p
        p = self.mission.get(key)
        if p is not None:
            return p
        # Defined at no scope: mission default is granted, unconstrained.
        return Permission(key=key, granted=True)

    def apply(
        self, ch: PermissionChange, known_agents: set[str], known_roles: set[str]
    ) -> tuple[dict[str, Any], dict[str, Any]]:
        """Apply a change; returns (old, new) permission dicts for the log."""
        if ch.key not in self.vocabulary:
            raise UnknownPermission(ch.key)
        new = Permission(key=ch.key, granted=ch.granted, constraint=ch.constraint)
        if ch.scope_kind == "mission":
            old = self.mission.get(ch.key, Permission(ch.key, True))
            self.mission[ch.key] = new
        elif ch.scope_kind == "role":
            if ch.scope_id not in known_roles:
                raise UnresolvableScope(f"unknown role {ch.scope_id!r}")
            old = self.by_role.get((ch.scope_id, ch.key), self.mission.get(ch.key, Permission(ch.key, True)))
            self.by_role[(ch.scope_id, ch.key)] = new
        elif ch.scope_kind == "agent":
            if ch.scope_id not in known_agents:
                raise UnresolvableScope(f"unknown agent {ch.scope_id!r}")
            old = self.by_agent.get((ch.scope_id, ch.key), self.mission.get(ch.key, Permission(ch.key, True)))
            self.by_agent[(ch.scope_id, ch.key)] = new
        else:
            raise UnresolvableScope(f"unknown scope kind {ch.scope_kind!r}")
        return old.to_dict(), new.to_dict()

    def snapshot(self) -> dict[str, Any]:
        return {
            "mission": {k: p.to_dict() for k, p in sorted(self.mission.items())},
            "role": {f"{r}:{k}": p.to_dict() for (r, k), p in sorted(self.by_role.items())},
            "agent": {f"{a}:{k}": p.to_dict() for (a, k), p in sorted(self.by_agent.items())},
        }
