"""Agent state and the per-tick reasoning cycle.

Each tick an agent pops at most one event, runs the two-step dispatcher
(applicability, then meta-level selection), instantiates an intention
for the winning plan, and advances every running intention by one step.
The cycle is deterministic: identical (state, tick, context) inputs
yield identical outputs, which is what makes replay byte-exact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable

from .beliefs import KnowledgeBase
from .plans import (
    BdiEvent,
    GoalInstance,
    Intention,
    PlanSpec,
    applicable_plans,
    select_plan,
)

ARRIVAL_EPS = 1e-6


class DuplicateGoal(ValueError):
    pass


class NoSuchGoal(KeyError):
    pass


class UnknownParameter(KeyError):
    pass


@dataclass(frozen=True)
class PrimitiveAction:
    agent: str
    verb: str  # move | rtl | land | set-mode | broadcast | deliver | capture
    args: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {"agent": self.agent, "verb": self.verb, "args": self.args}


@dataclass
class ReasoningContext:
    """Engine services the cycle needs; all callbacks are deterministic."""

    permission_granted: Callable[[str, str], bool]  # (agent-id, key) -> bool
    agent_position: Callable[[str], tuple[float, float]]
    home_position: Callable[[str], tuple[float, float]]
    agent_capabilities: Callable[[str], set[str]]
    open_confirmation: Callable[[str, dict[str, Any]], str]  # -> request-id
    request_replacement: Callable[[str, str], None]  # (agent-id, goal-id)
    record_decision: Callable[[dict[str, Any]], str]  # -> decision-id
    emit: Callable[..., None]  # (kind, payload, agent)
    on_command: Callable[[str, dict[str, Any], int], None] | None = None


@dataclass
class AgentState:
    agent_id: str
    role_name: str
    kb: KnowledgeBase
    library: list[PlanSpec] = field(default_factory=list)
    goals: list[GoalInstance] = field(default_factory=list)
    intentions: list[Intention] = field(default_factory=list)
    event_queue: deque[BdiEvent] = field(default_factory=deque)
    failed_plans: set[tuple[str, str]] = field(default_factory=set)  # (goal, plan)

    def goal(self, goal_id: str) -> GoalInstance | None:
        for g in self.goals:
            if g.goal_id == goal_id:
                return g
        return None

    def plan(self, plan_id: str) -> PlanSpec | None:
        for p in self.library:
            if p.plan_id == plan_id:
                return p
        return None

    def running_intention_for(self, goal_id: str) -> Intention | None:
        for it in self.intentions:
            if it.goal_id == goal_id and it.status in ("running", "blocked"):
                return it
        return None


def adopt_goal(agent: AgentState, g: GoalInstance) -> BdiEvent:
    """Append a goal in state active and enqueue its adoption event."""
    existing = agent.goal(g.goal_id)
    if existing is not None and existing.state in ("active", "suspended"):
        raise DuplicateGoal(g.goal_id)
    if existing is not None:
        agent.goals.remove(existing)
    agent.goals.append(g)
    ev = BdiEvent(
        kind="goal-adopted",
        tick=0,
        agent=agent.agent_id,
        goal_id=g.goal_id,
        goal_name=g.name,
    )
    agent.event_queue.append(ev)
    return ev


def drop_goal(agent: AgentState, goal_id: str, reason: str) -> BdiEvent:
    """Terminate a goal (achieved or aborted) and cancel its intentions."""
    g = agent.goal(goal_id)
    if g is None or g.state in ("achieved", "aborted"):
        raise NoSuchGoal(goal_id)
    g.transition(reason)
    for it in agent.intentions:
        if it.goal_id == goal_id and it.status in ("running", "blocked"):
            it.status = "cancelled"
    ev = BdiEvent(
        kind="goal-dropped",
        tick=0,
        agent=agent.agent_id,
        goal_id=goal_id,
        goal_name=g.name,
    )
    agent.event_queue.append(ev)
    return ev


def apply_feedback(agent: AgentState, target: str, updates: dict[str, float]) -> None:
    """Atomically replace named parameters of a goal or plan."""
    g = agent.goal(target)
    if g is not None:
        unknown = [k for k in updates if k not in g.parameters]
        if unknown:
            raise UnknownParameter(f"goal {target}: unknown parameters {unknown}")
        g.parameters.update(updates)
        return
    p = agent.plan(target)
    if p is not None:
        unknown = [k for k in updates if k not in p.parameters]
        if unknown:
            raise UnknownParameter(f"plan {target}: unknown parameters {unknown}")
        p.parameters.update(updates)
        return
    raise NoSuchGoal(target)


def _handle_command(
    agent: AgentState, ev: BdiEvent, tick: int, ctx: ReasoningContext
) -> None:
    """Built-in command semantics: commands manipulate goals directly."""
    cmd = ev.command or {}
    kind = cmd.get("kind")
    if kind == "replace":
        victim = cmd["victim"]
        for g in list(agent.goals):
            if g.state == "active" and g.goal_type != "maintain":
                drop_goal(agent, g.goal_id, "aborted")
                ctx.emit(
                    "goal-dropped",
                    {"goal_id": g.goal_id, "name": g.name, "state": "aborted"},
                    agent.agent_id,
                )
        gid = f"track-{victim}"
        if agent.goal(gid) is None or agent.goal(gid).state in ("achieved", "aborted"):
            adopt_goal(
                agent,
                GoalInstance(
                    goal_id=gid,
                    name="track_victim",
                    goal_type="maintain",
                    parameters={"victim": victim},
                ),
            )
            ctx.emit(
                "goal-adopted",
                {"goal_id": gid, "name": "track_victim", "parameters": {"victim": victim}},
                agent.agent_id,
            )
    elif kind == "goto":
        gid = f"goto-{tick}"
        adopt_goal(
            agent,
            GoalInstance(
                goal_id=gid,
                name="goto",
                goal_type="perform",
                parameters={"x": cmd["x"], "y": cmd["y"]},
            ),
        )
        ctx.emit(
            "goal-adopted",
            {"goal_id": gid, "name": "goto", "parameters": {"x": cmd["x"], "y": cmd["y"]}},
            agent.agent_id,
        )
    elif kind == "rtl":
        for g in list(agent.goals):
            if g.state == "active" and g.goal_type != "maintain":
                drop_goal(agent, g.goal_id, "aborted")
                ctx.emit(
                    "goal-dropped",
                    {"goal_id": g.goal_id, "name": g.name, "state": "aborted"},
                    agent.agent_id,
                )
        gid = f"rtl-{tick}"
        adopt_goal(agent, GoalInstance(goal_id=gid, name="rtl", goal_type="perform"))
        ctx.emit("goal-adopted", {"goal_id": gid, "name": "rtl"}, agent.agent_id)
    elif kind == "stop-tracking":
        for g in list(agent.goals):
            if g.name == "track_victim" and g.state in ("active", "suspended"):
                drop_goal(agent, g.goal_id, "aborted")
                ctx.emit(
                    "goal-dropped",
                    {"goal_id": g.goal_id, "name": g.name, "state": "aborted"},
                    agent.agent_id,
                )
    elif kind == "deliver":
        gid = f"deliver-{tick}"
        adopt_goal(
            agent,
            GoalInstance(
                goal_id=gid,
                name="deliver_flotation",
                goal_type="perform",
                parameters={"victim": cmd.get("victim", "")},
            ),
        )
        ctx.emit(
            "goal-adopted",
            {"goal_id": gid, "name": "deliver_flotation", "parameters": {"victim": cmd.get("victim", "")}},
            agent.agent_id,
        )
    elif kind == "set-role":
        agent.role_name = cmd["role"]
        ctx.emit(
            "action-executed",
            {"verb": "set-mode", "args": {"mode": cmd["role"]}, "via": "command"},
            agent.agent_id,
        )
    if ctx.on_command is not None:
        ctx.on_command(agent.agent_id, cmd, tick)


def _dispatch(agent: AgentState, ev: BdiEvent, tick: int, ctx: ReasoningContext) -> None:
    """Two-step dispatch of one event; logs a rationale when the choice
    is contested (≥2 candidates) or the event goes unhandled."""
    reads: list[Any] = []
    reject: dict[str, str] = {}

    def granted(key: str) -> bool:
        return ctx.permission_granted(agent.agent_id, key)

    candidates = applicable_plans(agent.library, ev, agent.kb, granted, reads, reject)

    # A failed plan is not retried for the same goal; the dispatcher
    # falls through to the next applicable plan on the re-raised event.
    if ev.goal_id is not None:
        kept = []
        for p in candidates:
            if (ev.goal_id, p.plan_id) in agent.failed_plans:
                reject[p.plan_id] = "previously failed for this goal"
            else:
                kept.append(p)
        candidates = kept

    chosen = select_plan(candidates)

    candidate_rows = [
        {
            "plan_id": p.plan_id,
            "applicable": any(c.plan_id == p.plan_id for c in candidates),
            "reject_reason": reject.get(p.plan_id, ""),
        }
        for p in agent.library
    ]
    input_rows = [
        {"key": b.key, "value": b.value.to_dict(), "version": b.version} for b in reads
    ]

    if chosen is None:
        ctx.record_decision(
            {
                "decision_kind": "unhandled-event",
                "agent": agent.agent_id,
                "tick": tick,
                "event": ev.summary(),
                "inputs": input_rows,
                "candidates": candidate_rows,
                "chosen": None,
                "rationale": f"No applicable plan for event {ev.kind}"
                + (f" ({ev.signal})" if ev.signal else "")
                + "; the event was left unhandled.",
            }
        )
        return

    if len(candidates) >= 2:
        ctx.record_decision(
            {
                "decision_kind": "plan-selection",
                "agent": agent.agent_id,
                "tick": tick,
                "event": ev.summary(),
                "inputs": input_rows,
                "candidates": candidate_rows,
                "chosen": chosen.plan_id,
                "rationale": (
                    f"Selected plan {chosen.plan_id} (priority {chosen.priority}) "
                    f"from {len(candidates)} applicable plans by highest priority, "
                    "then declaration order."
                ),
            }
        )

    goal_id = ev.goal_id
    if goal_id is None:
        # Event not tied to a goal: bind the intention to a synthetic
        # perform goal so intention bookkeeping stays uniform.
        goal_id = f"{chosen.plan_id}@{tick}"
        agent.goals.append(
            GoalInstance(goal_id=goal_id, name=chosen.goal_name or chosen.plan_id, goal_type="perform")
        )
    elif agent.running_intention_for(goal_id) is not None:
        # A goal may carry at most one running intention: supersede it.
        agent.running_intention_for(goal_id).status = "cancelled"

    # A higher-priority reaction (e.g. RTL on low battery) preempts the
    # agent's other running intentions for non-maintain goals.
    if ev.kind == "internal-signal":
        for it in agent.intentions:
            if it.status == "running" and it.goal_id != goal_id:
                g = agent.goal(it.goal_id)
                if g is not None and g.goal_type != "maintain":
                    it.status = "cancelled"

    agent.intentions.append(Intention(goal_id=goal_id, plan_id=chosen.plan_id))
    ctx.emit(
        "plan-selected",
        {
            "plan_id": chosen.plan_id,
            "goal_id": goal_id,
            "event": ev.summary(),
            "candidates": [p.plan_id for p in candidates],
            "candidate_count": len(candidates),
        },
        agent.agent_id,
    )


def _resolve_step_args(
    agent: AgentState, plan: PlanSpec, goal: GoalInstance | None, step_args: dict[str, Any]
) -> dict[str, Any]:
    """Resolve indirect step arguments: {"param": n} from the plan,
    {"goal": n} from the goal instance, {"belief": key} from the store
    (with an optional "field" picking into a structured value)."""
    out: dict[str, Any] = {}
    for k, v in step_args.items():
        if isinstance(v, dict) and "goal" in v:
            out[k] = (goal.parameters if goal is not None else {}).get(v["goal"])
        elif isinstance(v, dict) and "belief" in v:
            b = agent.kb.get(v["belief"])
            val = b.value.value if b is not None else None
            if isinstance(val, dict) and "field" in v:
                val = val.get(v["field"])
            out[k] = val
        else:
            out[k] = plan.resolve_arg(v)
    return out


def _advance_intention(
    agent: AgentState, it: Intention, tick: int, ctx: ReasoningContext
) -> list[PrimitiveAction]:
    plan = agent.plan(it.plan_id)
    if plan is None:
        it.status = "cancelled"
        return []
    if it.program_counter >= len(plan.body):
        it.status = "done"
        return []
    step = plan.body[it.program_counter]
    args = _resolve_step_args(agent, plan, agent.goal(it.goal_id), step.args)
    aid = agent.agent_id
    actions: list[PrimitiveAction] = []

    if step.action == "wait":
        if it.wait_remaining <= 0:
            it.wait_remaining = int(args.get("ticks", 1))
        it.wait_remaining -= 1
        if it.wait_remaining <= 0:
            it.program_counter += 1
    elif step.action in ("move-to", "return-to-launch"):
        if step.action == "move-to":
            if args.get("x") is None or args.get("y") is None:
                it.status = "cancelled"
                agent.failed_plans.add((it.goal_id, it.plan_id))
                ctx.emit(
                    "plan-failed",
                    {
                        "plan_id": it.plan_id,
                        "goal_id": it.goal_id,
                        "reason": "move-to target could not be resolved",
                    },
                    aid,
                )
                return actions
            tx, ty = float(args["x"]), float(args["y"])
        else:
            tx, ty = ctx.home_position(aid)
        px, py = ctx.agent_position(aid)
        if abs(px - tx) < ARRIVAL_EPS and abs(py - ty) < ARRIVAL_EPS:
            it.program_counter += 1
        else:
            verb = "move" if step.action == "move-to" else "rtl"
            actions.append(PrimitiveAction(aid, verb, {"x": tx, "y": ty}))
    elif step.action == "land":
        actions.append(PrimitiveAction(aid, "land", {}))
        it.program_counter += 1
    elif step.action == "set-mode":
        agent.role_name = str(args["mode"])
        actions.append(PrimitiveAction(aid, "set-mode", {"mode": args["mode"]}))
        it.program_counter += 1
    elif step.action == "broadcast-belief":
        actions.append(PrimitiveAction(aid, "broadcast", {"pattern": args["pattern"]}))
        it.program_counter += 1
    elif step.action == "request-confirmation":
        subject = dict(args.get("subject", {}))
        req_id = ctx.open_confirmation(aid, subject)
        it.waiting_on = req_id
        it.status = "blocked"
        it.program_counter += 1
    elif step.action == "request-replacement":
        ctx.request_replacement(aid, it.goal_id)
        it.program_counter += 1
    elif step.action == "deliver":
        if "flotation-payload" not in ctx.agent_capabilities(aid):
            it.status = "cancelled"
            agent.failed_plans.add((it.goal_id, it.plan_id))
            ctx.emit(
                "plan-failed",
                {
                    "plan_id": it.plan_id,
                    "goal_id": it.goal_id,
                    "reason": "deliver requires the flotation-payload capability",
                },
                aid,
            )
            g = agent.goal(it.goal_id)
            if g is not None and g.state == "active":
                agent.event_queue.append(
                    BdiEvent(
                        kind="goal-adopted",
                        tick=tick,
                        agent=aid,
                        goal_id=g.goal_id,
                        goal_name=g.name,
                    )
                )
            return actions
        actions.append(PrimitiveAction(aid, "deliver", {"payload": args.get("payload", "flotation")}))
        it.program_counter += 1
    elif step.action == "capture":
        actions.append(PrimitiveAction(aid, "capture", {"sensor": args.get("sensor", "camera")}))
        it.program_counter += 1
    else:
        it.status = "cancelled"
        agent.failed_plans.add((it.goal_id, it.plan_id))
        ctx.emit(
            "plan-failed",
            {"plan_id": it.plan_id, "goal_id": it.goal_id, "reason": f"unknown action {step.action}"},
            aid,
        )
        return actions

    if it.program_counter >= len(plan.body) and it.status == "running":
        it.status = "done"
        g = agent.goal(it.goal_id)
        if g is not None and g.state == "active" and g.goal_type != "maintain":
            g.transition("achieved")
            agent.event_queue.append(
                BdiEvent(
                    kind="goal-dropped",
                    tick=tick,
                    agent=aid,
                    goal_id=g.goal_id,
                    goal_name=g.name,
                )
            )
            ctx.emit(
                "goal-dropped",
                {"goal_id": g.goal_id, "name": g.name, "state": "achieved"},
                aid,
            )
    return actions


def reasoning_step(
    agent: AgentState, tick: int, ctx: ReasoningContext
) -> list[PrimitiveAction]:
    """One reasoning cycle: pop one event, dispatch, advance intentions."""
    if agent.event_queue:
        ev = agent.event_queue.popleft()
        if ev.kind == "command-received":
            _handle_command(agent, ev, tick, ctx)
        else:
            _dispatch(agent, ev, tick, ctx)

    actions: list[PrimitiveAction] = []
    for it in list(agent.intentions):
        if it.status == "running":
            actions.extend(_advance_intention(agent, it, tick, ctx))
    # Drop finished intention records to keep state bounded.
    agent.intentions = [it for it in agent.intentions if it.status in ("running", "blocked")]
    return actions
