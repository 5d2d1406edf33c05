"""Mission event records and their canonical JSONL serialization.

The event log is the engine's single source of truth: every observable
occurrence becomes one MissionEvent, and replay is a fold over the log.
Serialization is canonical (sorted keys, compact separators, floats
rounded to 6 decimals) so that two identical runs produce byte-identical
log files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

EVENT_KINDS = frozenset(
    {
        "belief-changed",
        "goal-adopted",
        "goal-dropped",
        "plan-selected",
        "plan-failed",
        "permission-changed",
        "interaction-received",
        "confirmation-opened",
        "confirmation-answered",
        "decision-logged",
        "detection",
        "action-executed",
        "error",
    }
)


@dataclass
class MissionEvent:
    seq: int
    tick: int
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)
    agent: str | None = None

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "seq": self.seq,
            "tick": self.tick,
            "kind": self.kind,
            "payload": self.payload,
        }
        if self.agent is not None:
            d["agent"] = self.agent
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "MissionEvent":
        if d["kind"] not in EVENT_KINDS:
            raise ValueError(f"unknown event kind: {d['kind']!r}")
        return cls(
            seq=d["seq"],
            tick=d["tick"],
            kind=d["kind"],
            payload=d.get("payload", {}),
            agent=d.get("agent"),
        )


def _canon(obj: Any) -> Any:
    """Round every float to 6 decimals, recursively."""
    if isinstance(obj, float):
        return round(obj, 6)
    if isinstance(obj, dict):
        return {k: _canon(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canon(v) for v in obj]
    return obj


def canonical_json(obj: Any) -> str:
    """Canonical single-line JSON: sorted keys, compact, 6-decimal floats."""
    return json.dumps(_canon(obj), sort_keys=True, separators=(",", ":"))


def event_to_line(ev: MissionEvent) -> str:
    return canonical_json(ev.to_dict())


def write_log(events: list[MissionEvent], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for ev in events:
            f.write(event_to_line(ev) + "\n")


def read_log(path: str) -> list[MissionEvent]:
    """Parse a JSONL event log; raises ValueError naming the bad line."""
    events: list[MissionEvent] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                events.append(MissionEvent.from_dict(json.loads(line)))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ValueError(f"corrupt event log at line {lineno}: {exc}") from exc
    return events
