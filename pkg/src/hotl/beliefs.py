"""Per-agent knowledge bases with three situational-awareness levels.

Beliefs are tagged with SA level 1 (objects exist), 2 (context), or
3 (projections), a provenance source, and the tick of assertion.
Conflicts between concurrent assertions resolve through a deterministic
total order so that merging is order-independent and replay is exact:
newer tick wins; on equal tick human > agent > sensor; on equal rank the
lower origin id wins.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any

VALUE_KINDS = frozenset({"position", "scalar", "boolean", "text", "duration", "id"})

SOURCE_RANK = {"human": 3, "agent": 2, "sensor": 1}


class MalformedBelief(ValueError):
    pass


@dataclass(frozen=True)
class BeliefValue:
    """Closed sum of value kinds so the event log has a stable serialization."""

    kind: str
    value: Any  # {"x","y"} dict for position; number / bool / str otherwise

    def __post_init__(self) -> None:
        if self.kind not in VALUE_KINDS:
            raise MalformedBelief(f"unknown value kind: {self.kind!r}")

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind, "value": self.value}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "BeliefValue":
        return cls(kind=d["kind"], value=d["value"])


def position(x: float, y: float) -> BeliefValue:
    return BeliefValue("position", {"x": float(x), "y": float(y)})


def scalar(v: float) -> BeliefValue:
    return BeliefValue("scalar", float(v))


def boolean(v: bool) -> BeliefValue:
    return BeliefValue("boolean", bool(v))


def text(v: str) -> BeliefValue:
    return BeliefValue("text", str(v))


def duration(seconds: float) -> BeliefValue:
    return BeliefValue("duration", float(seconds))


def ident(v: str) -> BeliefValue:
    return BeliefValue("id", str(v))


@dataclass(frozen=True)
class Source:
    """Provenance: sensor(agent), agent(agent), or human(operator)."""

    kind: str  # sensor | agent | human
    origin: str

    def __post_init__(self) -> None:
        if self.kind not in SOURCE_RANK:
            raise MalformedBelief(f"unknown source kind: {self.kind!r}")

    @property
    def rank(self) -> int:
        return SOURCE_RANK[self.kind]

    def to_dict(self) -> dict[str, str]:
        return {"kind": self.kind, "origin": self.origin}

    @classmethod
    def from_dict(cls, d: dict[str, str]) -> "Source":
        return cls(kind=d["kind"], origin=d["origin"])


@dataclass(frozen=True)
class Belief:
    key: str
    level: int
    value: BeliefValue
    source: Source
    tick: int
    version: int = 0  # assigned by the store on assertion

    def __post_init__(self) -> None:
        if self.level not in (1, 2, 3):
            raise MalformedBelief(f"SA level must be 1, 2 or 3, got {self.level}")

    def to_dict(self) -> dict[str, Any]:
        return {
            "key": self.key,
            "level": self.level,
            "value": self.value.to_dict(),
            "source": self.source.to_dict(),
            "tick": self.tick,
            "version": self.version,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Belief":
        return cls(
            key=d["key"],
            level=d["level"],
            value=BeliefValue.from_dict(d["value"]),
            source=Source.from_dict(d["source"]),
            tick=d["tick"],
            version=d.get("version", 0),
        )


def _precedence(b: Belief) -> tuple[int, int, str]:
    # Total order for conflict resolution; higher tuple wins. Lower origin
    # id wins on equal (tick, rank), hence the reversed-sort trick below.
    return (b.tick, b.source.rank, b.source.origin)


def wins_over(challenger: Belief, incumbent: Belief) -> bool:
    """True when challenger replaces incumbent under the conflict policy."""
    if challenger.tick != incumbent.tick:
        return challenger.tick > incumbent.tick
    if challenger.source.rank != incumbent.source.rank:
        return challenger.source.rank > incumbent.source.rank
    # Equal tick and rank: lower origin id wins; equal origin: replace
    # (later assertion by the same origin supersedes).
    if challenger.source.origin != incumbent.source.origin:
        return challenger.source.origin < incumbent.source.origin
    return True


@dataclass
class KnowledgeBase:
    owner: str
    entries: dict[str, Belief] = field(default_factory=dict)
    subscriptions: set[str] = field(default_factory=set)

    def assert_belief(self, b: Belief) -> list[dict[str, Any]]:
        """Apply one belief; returns belief-changed payloads (0 or 1).

        A no-op (same value under the conflict policy, or a losing
        challenger) emits nothing and leaves the version untouched.
        """
        if b.level not in (1, 2, 3):
            raise MalformedBelief(f"SA level must be 1, 2 or 3, got {b.level}")
        old = self.entries.get(b.key)
        if old is not None:
            if not wins_over(b, old):
                return []
            if old.value == b.value and old.level == b.level:
                return []
            version = old.version + 1
        else:
            version = 1
        stored = replace(b, version=version)
        self.entries[b.key] = stored
        return [
            {
                "key": stored.key,
                "level": stored.level,
                "value": stored.value.to_dict(),
                "source": stored.source.to_dict(),
                "belief_tick": stored.tick,
                "version": stored.version,
            }
        ]

    def merge_remote(
        self, incoming: list[Belief]
    ) -> tuple[list[dict[str, Any]], list[dict[str, Any]]]:
        """Apply a batch of remote beliefs; returns (changes, rejections).

        Malformed beliefs are skipped and reported, never aborting the
        batch. The per-key result is order-independent because the
        conflict policy is a total order: applying in precedence order
        makes any input permutation converge.
        """
        changes: list[dict[str, Any]] = []
        rejections: list[dict[str, Any]] = []
        valid: list[Belief] = []
        for b in incoming:
            if b.level not in (1, 2, 3):
                rejections.append({"key": b.key, "reason": f"bad SA level {b.level}"})
                continue
            valid.append(b)
        for b in sorted(valid, key=_precedence):
            changes.extend(self.assert_belief(b))
        # Only the final state per key is a real change; collapse
        # intermediate wins so events match the converged state.
        final: dict[str, dict[str, Any]] = {}
        for ch in changes:
            final[ch["key"]] = ch
        return list(final.values()), rejections

    def query(self, pattern: str) -> list[Belief]:
        """Dotted-path lookup with an optional trailing `*` segment."""
        if pattern.endswith(".*"):
            prefix = pattern[:-1]  # keep the dot
            keys = [k for k in self.entries if k.startswith(prefix)]
        elif pattern == "*":
            keys = list(self.entries)
        else:
            keys = [pattern] if pattern in self.entries else []
        return [self.entries[k] for k in sorted(keys)]

    def get(self, key: str) -> Belief | None:
        return self.entries.get(key)

    def snapshot(self) -> dict[str, Belief]:
        return dict(self.entries)
