"""Plan templates, goals, intentions, and the two-step dispatcher.

A plan fires when its trigger matches the current event, its
precondition (a conjunction of belief comparisons) holds on the agent's
knowledge base, and its required permission, if any, is granted. The
meta-level selection among applicable plans is lexicographic: highest
priority first, then earliest declaration order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable

from .beliefs import Belief, KnowledgeBase


class PlanError(ValueError):
    pass


@dataclass(frozen=True)
class BdiEvent:
    """One unit of work for an agent's reasoning cycle."""

    kind: str  # belief-changed | goal-adopted | goal-dropped | internal-signal
    #          # | command-received | feedback-received
    tick: int
    agent: str
    key: str | None = None  # belief-changed
    signal: str | None = None  # internal-signal
    goal_id: str | None = None  # goal-adopted / goal-dropped
    goal_name: str | None = None  # goal-adopted / goal-dropped
    command: dict[str, Any] | None = None  # command-received
    feedback: dict[str, Any] | None = None  # feedback-received

    def summary(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind, "tick": self.tick}
        for name in ("key", "signal", "goal_id", "goal_name"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        if self.command is not None:
            d["command"] = self.command.get("kind")
        if self.feedback is not None:
            d["feedback"] = self.feedback.get("verdict")
        return d


@dataclass(frozen=True)
class Trigger:
    kind: str
    signal: str | None = None
    key_pattern: str | None = None
    command: str | None = None
    goal: str | None = None  # goal name for goal-adopted / goal-dropped

    def matches(self, ev: BdiEvent) -> bool:
        if ev.kind != self.kind:
            return False
        if self.signal is not None and ev.signal != self.signal:
            return False
        if self.goal is not None and ev.goal_name != self.goal:
            return False
        if self.key_pattern is not None:
            if ev.key is None:
                return False
            if self.key_pattern.endswith(".*"):
                if not ev.key.startswith(self.key_pattern[:-1]):
                    return False
            elif ev.key != self.key_pattern:
                return False
        if self.command is not None:
            if ev.command is None or ev.command.get("kind") != self.command:
                return False
        return True

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"kind": self.kind}
        for name in ("signal", "key_pattern", "command", "goal"):
            v = getattr(self, name)
            if v is not None:
                d[name] = v
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Trigger":
        return cls(
            kind=d["kind"],
            signal=d.get("signal"),
            key_pattern=d.get("key_pattern"),
            command=d.get("command"),
            goal=d.get("goal"),
        )


_COMPARATORS: dict[str, Callable[[Any, Any], bool]] = {
    "eq": lambda a, b: a == b,
    "ne": lambda a, b: a != b,
    "lt": lambda a, b: a < b,
    "le": lambda a, b: a <= b,
    "gt": lambda a, b: a > b,
    "ge": lambda a, b: a >= b,
}


@dataclass(frozen=True)
class Condition:
    """One belief comparison. Ops: eq/ne/lt/le/gt/ge on plain values,
    `within` (position inside a radius of a center), `exists`."""

    key: str
    op: str
    value: Any = None
    radius: float | None = None  # within only

    def holds(self, kb: KnowledgeBase, reads: list[Belief] | None = None) -> bool:
        b = kb.get(self.key)
        if self.op == "exists":
            if b is not None and reads is not None:
                reads.append(b)
            return (b is not None) == (self.value is not False)
        if b is None:
            return False
        if reads is not None:
            reads.append(b)
        if self.op == "within":
            pos = b.value.value
            if not isinstance(pos, dict):
                return False
            dx = pos["x"] - self.value["x"]
            dy = pos["y"] - self.value["y"]
            return (dx * dx + dy * dy) ** 0.5 <= (self.radius or 0.0)
        cmp = _COMPARATORS.get(self.op)
        if cmp is None:
            raise PlanError(f"unknown condition op {self.op!r}")
        try:
            return cmp(b.value.value, self.value)
        except TypeError:
            return False

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"key": self.key, "op": self.op}
        if self.value is not None:
            d["value"] = self.value
        if self.radius is not None:
            d["radius"] = self.radius
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "Condition":
        return cls(key=d["key"], op=d["op"], value=d.get("value"), radius=d.get("radius"))


@dataclass(frozen=True)
class PlanStep:
    """One primitive action in a plan body.

    Actions: move-to, set-mode, broadcast-belief, request-confirmation,
    request-replacement, deliver, land, return-to-launch, capture, wait.
    Args may reference plan parameters via {"param": name}.
    """

    action: str
    args: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {"action": self.action}
        if self.args:
            d["args"] = self.args
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "PlanStep":
        return cls(action=d["action"], args=d.get("args", {}))


@dataclass
class PlanSpec:
    plan_id: str
    trigger: Trigger
    body: list[PlanStep]
    precondition: list[Condition] = field(default_factory=list)
    required_permission: str | None = None
    priority: int = 0
    parameters: dict[str, float] = field(default_factory=dict)
    goal_name: str | None = None  # goal this plan serves, if any

    def __post_init__(self) -> None:
        if not self.body:
            raise PlanError(f"plan {self.plan_id!r} has an empty body")
        for step in self.body:
            for v in step.args.values():
                if isinstance(v, dict) and "param" in v and v["param"] not in self.parameters:
                    raise PlanError(
                        f"plan {self.plan_id!r} step references unknown parameter {v['param']!r}"
                    )

    def resolve_arg(self, value: Any) -> Any:
        if isinstance(value, dict) and "param" in value:
            return self.parameters[value["param"]]
        return value


@dataclass
class GoalInstance:
    goal_id: str
    name: str
    goal_type: str = "achieve"  # achieve | maintain | perform
    parameters: dict[str, Any] = field(default_factory=dict)
    state: str = "active"  # active | suspended | achieved | aborted

    _TRANSITIONS = {
        "active": {"suspended", "achieved", "aborted"},
        "suspended": {"active", "aborted"},
    }

    def transition(self, new_state: str) -> None:
        allowed = self._TRANSITIONS.get(self.state, set())
        if new_state not in allowed:
            raise PlanError(f"goal {self.goal_id}: illegal transition {self.state} -> {new_state}")
        self.state = new_state


@dataclass
class Intention:
    goal_id: str
    plan_id: str
    program_counter: int = 0
    status: str = "running"  # running | blocked | done | cancelled
    waiting_on: str | None = None  # request-id when blocked
    wait_remaining: int = 0  # ticks left on a wait step


def applicable_plans(
    library: list[PlanSpec],
    ev: BdiEvent,
    kb: KnowledgeBase,
    permission_granted: Callable[[str], bool],
    reads: list[Belief] | None = None,
    reject_reasons: dict[str, str] | None = None,
) -> list[PlanSpec]:
    """First dispatcher step: trigger match, precondition, permission.

    Output preserves library declaration order. `reads` collects the
    beliefs actually consulted, for explanation records.
    """
    out: list[PlanSpec] = []
    for plan in library:
        if not plan.trigger.matches(ev):
            if reject_reasons is not None:
                reject_reasons[plan.plan_id] = "trigger mismatch"
            continue
        if not all(c.holds(kb, reads) for c in plan.precondition):
            if reject_reasons is not None:
                reject_reasons[plan.plan_id] = "precondition false"
            continue
        if plan.required_permission is not None and not permission_granted(plan.required_permission):
            if reject_reasons is not None:
                reject_reasons[plan.plan_id] = f"permission {plan.required_permission} not granted"
            continue
        out.append(plan)
    return out


def select_plan(candidates: list[PlanSpec]) -> PlanSpec | None:
    """Meta-level selection: highest priority, then declaration order."""
    if not candidates:
        return None
    best = candidates[0]
    for plan in candidates[1:]:
        if plan.priority > best.priority:
            best = plan
    return best
