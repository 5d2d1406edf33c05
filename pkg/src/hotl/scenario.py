"""Scenario files: validation, canonical round-trip, world/agent factories.

A scenario is a canonical-JSON document declaring the world, the agents
with their plan libraries, the permission vocabulary and defaults, the
tuning constants, and a script of tick-stamped occurrences. Loading
validates every cross-reference and reports the path to the offending
field on failure.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
import random
from typing import Any

from .autonomy import Permission, PermissionTable
from .beliefs import Belief, KnowledgeBase
from .coordination import (
    DEFAULT_ACCURACY_LIMIT,
    DEFAULT_DEDUP_RADIUS,
    DEFAULT_HANDLING_TIME,
    DEFAULT_OVERRIDE_WINDOW,
    DEFAULT_RESCUE_MARGIN,
)
from .events import canonical_json
from .interaction import DEFAULT_CONFIRMATION_EXPIRY, HumanInteraction
from .plans import Condition, PlanSpec, PlanStep, Trigger
from .agent import AgentState
from .world import Region, SensorModel, UavPhysical, Victim, WorldState

SCRIPT_KINDS = frozenset({"inject-interaction", "place-victim", "set-wind", "force-detection", "recharge"})

DEFAULT_CONSTANTS = {
    "margin": DEFAULT_RESCUE_MARGIN,
    "dedup_radius": DEFAULT_DEDUP_RADIUS,
    "accuracy_limit": DEFAULT_ACCURACY_LIMIT,
    "override_window": DEFAULT_OVERRIDE_WINDOW,
    "confirmation_expiry": DEFAULT_CONFIRMATION_EXPIRY,
    "handling_time": DEFAULT_HANDLING_TIME,
}


class ScenarioError(ValueError):
    """Validation failure; `path` points at the offending field."""

    def __init__(self, path: str, message: str) -> None:
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass
class AgentDecl:
    agent_id: str
    role: str
    plans: list[PlanSpec]
    goals: list[dict[str, Any]]
    beliefs: list[Belief]
    subscriptions: list[str]


@dataclass
class ScenarioSpec:
    name: str
    seed: int
    raw: dict[str, Any]
    agents: list[AgentDecl]
    roles: list[str]
    vocabulary: list[str]
    constrained: list[str]
    defaults: list[Permission]
    constants: dict[str, float]
    script: list[dict[str, Any]]

    def to_canonical(self) -> str:
        return canonical_json(self.raw) + "\n"

    # -- factories -----------------------------------------------------

    def build_world(self) -> WorldState:
        w = self.raw["world"]
        sensor_cfg = w.get("sensor", {})
        world = WorldState(
            width=float(w["width"]),
            height=float(w["height"]),
            sensor=SensorModel(**sensor_cfg),
            rng=random.Random(self.seed),
            battery_drain=float(w.get("battery_drain", 0.1)),
            move_drain=float(w.get("move_drain", 0.1)),
            low_battery_threshold=float(w.get("low_battery_threshold", 20.0)),
        )
        for u in w.get("uavs", []):
            home = u.get("home", {"x": u["x"], "y": u["y"]})
            world.uavs[u["agent_id"]] = UavPhysical(
                agent_id=u["agent_id"],
                x=float(u["x"]),
                y=float(u["y"]),
                battery=float(u.get("battery", 100.0)),
                max_speed=float(u.get("max_speed", 5.0)),
                capabilities=set(u.get("capabilities", ["camera"])),
                mode=u.get("mode", "search"),
                home_x=float(home["x"]),
                home_y=float(home["y"]),
                altitude=float(u.get("altitude", 40.0)),
            )
        for v in w.get("victims", []):
            world.victims.append(
                Victim(
                    victim_id=v["victim_id"],
                    x=float(v["x"]),
                    y=float(v["y"]),
                    drift_x=float(v.get("drift_x", 0.0)),
                    drift_y=float(v.get("drift_y", 0.0)),
                )
            )
        for r in w.get("regions", []):
            world.regions.append(Region(**r))
        return world

    def build_agents(self) -> dict[str, AgentState]:
        out: dict[str, AgentState] = {}
        for decl in self.agents:
            kb = KnowledgeBase(owner=decl.agent_id, subscriptions=set(decl.subscriptions))
            for b in decl.beliefs:
                kb.assert_belief(b)
            agent = AgentState(
                agent_id=decl.agent_id,
                role_name=decl.role,
                kb=kb,
                library=[_copy_plan(p) for p in decl.plans],
            )
            out[decl.agent_id] = agent
        return out

    def build_permissions(self) -> PermissionTable:
        table = PermissionTable(
            vocabulary=set(self.vocabulary), constrained_keys=set(self.constrained)
        )
        for p in self.defaults:
            table.mission[p.key] = p
        return table


def _copy_plan(p: PlanSpec) -> PlanSpec:
    return PlanSpec(
        plan_id=p.plan_id,
        trigger=p.trigger,
        body=list(p.body),
        precondition=list(p.precondition),
        required_permission=p.required_permission,
        priority=p.priority,
        parameters=dict(p.parameters),
        goal_name=p.goal_name,
    )


def _parse_plan(d: dict[str, Any], path: str) -> PlanSpec:
    for fld in ("plan_id", "trigger", "body"):
        if fld not in d:
            raise ScenarioError(f"{path}.{fld}", "missing required field")
    try:
        return PlanSpec(
            plan_id=d["plan_id"],
            trigger=Trigger.from_dict(d["trigger"]),
            body=[PlanStep.from_dict(s) for s in d["body"]],
            precondition=[Condition.from_dict(c) for c in d.get("precondition", [])],
            required_permission=d.get("required_permission"),
            priority=int(d.get("priority", 0)),
            parameters={k: float(v) for k, v in d.get("parameters", {}).items()},
            goal_name=d.get("goal_name"),
        )
    except (KeyError, ValueError) as exc:
        raise ScenarioError(path, str(exc)) from exc


def load_scenario(source: str | Path | dict[str, Any]) -> ScenarioSpec:
    """Load and validate a scenario from a path, JSON text, or dict."""
    if isinstance(source, dict):
        doc = source
    else:
        if isinstance(source, Path):
            txt = source.read_text()
        elif "\n" not in source and Path(source).exists():
            txt = Path(source).read_text()
        else:
            txt = source
        try:
            doc = json.loads(txt)
        except json.JSONDecodeError as exc:
            raise ScenarioError("$", f"not valid JSON: {exc}") from exc

    for fld in ("name", "seed", "world", "agents", "permissions"):
        if fld not in doc:
            raise ScenarioError(f"$.{fld}", "missing required field")

    perms = doc["permissions"]
    vocabulary = list(perms.get("vocabulary", []))
    constrained = list(perms.get("constrained", []))
    for i, key in enumerate(constrained):
        if key not in vocabulary:
            raise ScenarioError(f"$.permissions.constrained[{i}]", f"unknown permission key {key!r}")
    defaults: list[Permission] = []
    for i, p in enumerate(perms.get("defaults", [])):
        if p["key"] not in vocabulary:
            raise ScenarioError(f"$.permissions.defaults[{i}].key", f"unknown permission key {p['key']!r}")
        if p.get("constraint") is not None and p["key"] not in constrained:
            raise ScenarioError(
                f"$.permissions.defaults[{i}].constraint",
                f"permission {p['key']!r} is not declared constrained",
            )
        defaults.append(Permission(key=p["key"], granted=bool(p["granted"]), constraint=p.get("constraint")))

    roles = list(doc.get("roles", []))
    agents: list[AgentDecl] = []
    seen_ids: set[str] = set()
    for i, a in enumerate(doc["agents"]):
        apath = f"$.agents[{i}]"
        aid = a.get("agent_id")
        if not aid:
            raise ScenarioError(f"{apath}.agent_id", "missing agent id")
        if aid in seen_ids:
            raise ScenarioError(f"{apath}.agent_id", f"duplicate agent id {aid!r}")
        seen_ids.add(aid)
        if roles and a.get("role") not in roles:
            raise ScenarioError(f"{apath}.role", f"role {a.get('role')!r} not in declared role set")
        plans = [_parse_plan(p, f"{apath}.plans[{j}]") for j, p in enumerate(a.get("plans", []))]
        plan_ids = [p.plan_id for p in plans]
        if len(plan_ids) != len(set(plan_ids)):
            raise ScenarioError(f"{apath}.plans", "duplicate plan ids")
        for j, p in enumerate(plans):
            if p.required_permission is not None and p.required_permission not in vocabulary:
                raise ScenarioError(
                    f"{apath}.plans[{j}].required_permission",
                    f"unknown permission key {p.required_permission!r}",
                )
        beliefs = [Belief.from_dict(b) for b in a.get("beliefs", [])]
        agents.append(
            AgentDecl(
                agent_id=aid,
                role=a.get("role", "search"),
                plans=plans,
                goals=list(a.get("goals", [])),
                beliefs=beliefs,
                subscriptions=list(a.get("subscriptions", [])),
            )
        )
    world_uavs = {u["agent_id"] for u in doc["world"].get("uavs", [])}
    for i, a in enumerate(agents):
        if a.agent_id not in world_uavs:
            raise ScenarioError(f"$.agents[{i}].agent_id", f"agent {a.agent_id!r} has no physical UAV")

    constants = dict(DEFAULT_CONSTANTS)
    constants.update({k: float(v) for k, v in doc.get("constants", {}).items()})

    script = list(doc.get("script", []))
    last_tick = -1
    for i, entry in enumerate(script):
        spath = f"$.script[{i}]"
        if "tick" not in entry or "do" not in entry:
            raise ScenarioError(spath, "script entries need tick and do")
        if entry["tick"] < last_tick:
            raise ScenarioError(f"{spath}.tick", "script must be sorted by tick")
        last_tick = entry["tick"]
        kind = entry["do"].get("kind")
        if kind not in SCRIPT_KINDS:
            raise ScenarioError(f"{spath}.do.kind", f"unknown occurrence kind {kind!r}")
        if kind == "inject-interaction":
            # Parse eagerly so malformed payloads fail at load time.
            hi = HumanInteraction.from_dict(entry["do"]["interaction"])
            if hi.kind == "changed-permission" and hi.change.key not in vocabulary:
                raise ScenarioError(
                    f"{spath}.do.interaction.change.key",
                    f"unknown permission key {hi.change.key!r}",
                )

    return ScenarioSpec(
        name=doc["name"],
        seed=int(doc["seed"]),
        raw=doc,
        agents=agents,
        roles=roles,
        vocabulary=vocabulary,
        constrained=constrained,
        defaults=defaults,
        constants=constants,
        script=script,
    )


def load_transcript(path: str | Path) -> list[tuple[int, HumanInteraction]]:
    """Load an operator transcript: JSONL of {"tick", "interaction"}."""
    entries: list[tuple[int, HumanInteraction]] = []
    with open(path, "r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                d = json.loads(line)
                entries.append((int(d["tick"]), HumanInteraction.from_dict(d["interaction"])))
            except (json.JSONDecodeError, KeyError, ValueError) as exc:
                raise ScenarioError(f"{path}:{lineno}", f"bad transcript entry: {exc}") from exc
    return entries


def shipped_scenario_path(name: str) -> Path:
    return Path(__file__).parent / "scenarios" / f"{name}.json"


def shipped_transcript_path(name: str) -> Path:
    return Path(__file__).parent / "scenarios" / f"{name}.transcript.jsonl"


def load_shipped(name: str) -> ScenarioSpec:
    return load_scenario(shipped_scenario_path(name))


SHIPPED_SCENARIOS = (
    "s1_rescue_strategy",
    "s2_strainers",
    "s3_confirmation",
    "s4_dedup",
    "s5_rtl_override",
    "f1_fire_mapping",
)
