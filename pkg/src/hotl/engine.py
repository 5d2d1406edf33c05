"""Mission engine: the tick loop tying agents, world, coordination, and
operator interactions together into one event-sourced log.

Determinism contract: (scenario, interaction transcript) fully determines
the event log, byte for byte. Everything that happens in a tick happens
in a fixed order: script entries, queued interactions, request expiries,
handover commits, sensing, rescue planning, agent reasoning (ascending
agent id), world physics, coverage replanning.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

from .agent import (
    AgentState,
    PrimitiveAction,
    ReasoningContext,
    adopt_goal,
    apply_feedback,
    drop_goal,
    reasoning_step,
)
from .autonomy import PermissionTable, UnknownPermission, UnresolvableScope
from .beliefs import Belief, KnowledgeBase, Source, boolean, ident, position, scalar
from .coordination import (
    DeliveryCandidate,
    Detection,
    PendingHandover,
    ReplacementCandidate,
    deduplicate_detections,
    plan_rescue,
    select_replacement,
)
from .events import MissionEvent
from .interaction import (
    DecisionLog,
    HumanInteraction,
    MalformedInteraction,
    RequestRegistry,
)
from .plans import BdiEvent, GoalInstance, PlanSpec, PlanStep, Trigger
from .scenario import ScenarioSpec
from .world import Victim, simulate_detection, step_world


def builtin_plans() -> list[PlanSpec]:
    """Plans every agent carries: goal-directed handlers for the goals
    that commands and coordination decisions adopt."""
    return [
        PlanSpec(
            plan_id="builtin-track",
            trigger=Trigger(kind="goal-adopted", goal="track_victim"),
            body=[
                PlanStep("set-mode", {"mode": "track"}),
                PlanStep("move-to", {"x": {"goal": "x"}, "y": {"goal": "y"}}),
                PlanStep("capture", {"sensor": "camera"}),
            ],
            priority=-10,
            goal_name="track_victim",
        ),
        PlanSpec(
            plan_id="builtin-goto",
            trigger=Trigger(kind="goal-adopted", goal="goto"),
            body=[PlanStep("move-to", {"x": {"goal": "x"}, "y": {"goal": "y"}})],
            priority=-10,
            goal_name="goto",
        ),
        PlanSpec(
            plan_id="builtin-rtl",
            trigger=Trigger(kind="goal-adopted", goal="rtl"),
            body=[PlanStep("return-to-launch", {}), PlanStep("land", {})],
            priority=-10,
            goal_name="rtl",
        ),
        PlanSpec(
            plan_id="builtin-deliver",
            trigger=Trigger(kind="goal-adopted", goal="deliver_flotation"),
            body=[
                PlanStep("move-to", {"x": {"goal": "x"}, "y": {"goal": "y"}}),
                PlanStep("deliver", {"payload": "flotation"}),
                PlanStep("return-to-launch", {}),
            ],
            priority=-10,
            goal_name="deliver_flotation",
        ),
        PlanSpec(
            plan_id="builtin-inspect",
            trigger=Trigger(kind="goal-adopted", goal="inspect"),
            body=[
                PlanStep("move-to", {"x": {"goal": "x"}, "y": {"goal": "y"}}),
                PlanStep("capture", {"sensor": "camera"}),
                PlanStep("capture", {"sensor": "camera"}),
            ],
            priority=-10,
            goal_name="inspect",
        ),
    ]


@dataclass
class QueuedInteraction:
    interaction: HumanInteraction
    admitted_tick: int
    seq: int  # interaction-received event seq (the ack)


class Mission:
    """One running mission: scenario, world, agents, permissions, log."""

    def __init__(self, spec: ScenarioSpec, max_ticks: int = 300) -> None:
        self.spec = spec
        self.max_ticks = max_ticks
        self.world = spec.build_world()
        self.agents: dict[str, AgentState] = spec.build_agents()
        for agent in self.agents.values():
            agent.library.extend(builtin_plans())
        self.permissions: PermissionTable = spec.build_permissions()
        self.permission_overlay: dict[str, dict[str, Any]] = {}
        self.registry = RequestRegistry(expiry=int(spec.constants["confirmation_expiry"]))
        self.decisions = DecisionLog()
        self.log: list[MissionEvent] = []
        self.status = "running"
        self.pending: list[QueuedInteraction] = []
        self.transcript: list[tuple[int, HumanInteraction]] = []
        self._transcript_idx = 0
        self._script_idx = 0
        self._forced_hits: list[dict[str, Any]] = []
        self.victim_status: dict[str, dict[str, Any]] = {}
        self.rescue_state: dict[str, dict[str, Any]] = {}
        self.handovers: list[PendingHandover] = []
        self._coverage_roles: set[str] = set()
        self._detection_counter = 0
        self._seq = 0
        self._bootstrap()

    # -- event plumbing ------------------------------------------------

    def emit(self, kind: str, payload: dict[str, Any], agent: str | None = None) -> MissionEvent:
        self._seq += 1
        ev = MissionEvent(seq=self._seq, tick=self.world.tick, kind=kind, payload=payload, agent=agent)
        self.log.append(ev)
        return ev

    def record_decision(self, rec: dict[str, Any]) -> str:
        decision_id = self.decisions.record(rec)
        self.emit("decision-logged", self.decisions.explain(decision_id), rec.get("agent"))
        return decision_id

    # -- bootstrap -----------------------------------------------------

    def _bootstrap(self) -> None:
        for aid in sorted(self.agents):
            agent = self.agents[aid]
            decl = next(d for d in self.spec.agents if d.agent_id == aid)
            for g in decl.goals:
                goal = GoalInstance(
                    goal_id=g["goal_id"],
                    name=g["name"],
                    goal_type=g.get("goal_type", "achieve"),
                    parameters=dict(g.get("parameters", {})),
                )
                adopt_goal(agent, goal)
                self.emit(
                    "goal-adopted",
                    {"goal_id": goal.goal_id, "name": goal.name, "parameters": goal.parameters},
                    aid,
                )
        faces = self.spec.raw.get("faces", [])
        if faces:
            self._coverage_roles = {"map_building"}
            self._assign_faces(initial=True)

    # -- permissions ---------------------------------------------------

    def permission_granted(self, agent_id: str, key: str) -> bool:
        role = self.agents[agent_id].role_name
        return self.permissions.resolve(agent_id, role, key).granted

    def permission_constraint(self, agent_id: str, key: str) -> float | None:
        role = self.agents[agent_id].role_name
        return self.permissions.resolve(agent_id, role, key).constraint

    # -- belief plumbing -----------------------------------------------

    def merge_beliefs(self, beliefs: list[Belief], targets: list[str] | None = None) -> None:
        """Merge a belief batch into the given agents' stores (all agents
        by default), logging one belief-changed per store change and
        enqueuing the matching reasoning event."""
        for aid in sorted(targets if targets is not None else self.agents):
            agent = self.agents[aid]
            changes, rejections = agent.kb.merge_remote(beliefs)
            for rej in rejections:
                self.emit("error", {"error": "malformed belief rejected", **rej}, aid)
            for ch in changes:
                self.emit("belief-changed", ch, aid)
                agent.event_queue.append(
                    BdiEvent(kind="belief-changed", tick=self.world.tick, agent=aid, key=ch["key"])
                )

    # -- interactions --------------------------------------------------

    def submit_interaction(self, hi: HumanInteraction) -> int:
        """Admit a live operator interaction; returns the ack seq.

        The interaction-received event is logged at admission; effects
        apply at the next tick boundary.
        """
        if self.status == "finished":
            raise MalformedInteraction("mission is finished")
        ev = self.emit(
            "interaction-received",
            {"interaction": hi.to_dict(), "origin": "live", "admitted_tick": self.world.tick},
        )
        self.pending.append(QueuedInteraction(hi, self.world.tick, ev.seq))
        return ev.seq

    def _apply_interaction(self, hi: HumanInteraction) -> None:
        tick = self.world.tick
        if hi.kind == "provided-information":
            self.merge_beliefs([hi.belief])
        elif hi.kind == "issued-command":
            agent = self.agents.get(hi.target)
            if agent is None:
                self.emit("error", {"error": f"command to nonexistent agent {hi.target!r}"})
                return
            agent.event_queue.append(
                BdiEvent(kind="command-received", tick=tick, agent=hi.target, command=hi.command)
            )
        elif hi.kind == "changed-permission":
            try:
                old, new = self.permissions.apply(
                    hi.change, set(self.agents), set(self.spec.roles) or {a.role_name for a in self.agents.values()}
                )
            except (UnknownPermission, UnresolvableScope) as exc:
                self.emit("error", {"error": f"permission change rejected: {exc}"})
                return
            scope = hi.change.scope_kind + (f":{hi.change.scope_id}" if hi.change.scope_id else "")
            self.permission_overlay[f"{scope}:{hi.change.key}"] = new
            self.emit(
                "permission-changed",
                {"key": hi.change.key, "scope": scope, "old": old, "new": new, "issuer": hi.issuer},
            )
        elif hi.kind == "feedback-response":
            try:
                req = self.registry.answer(hi.request_id)
            except MalformedInteraction as exc:
                self.emit("error", {"error": str(exc)})
                return
            self.emit(
                "confirmation-answered",
                {
                    "request_id": req.request_id,
                    "verdict": hi.verdict,
                    "subject": req.subject,
                    "note": hi.note,
                },
                req.agent_id,
            )
            self._apply_feedback_response(req, hi)

    def _apply_feedback_response(self, req: Any, hi: HumanInteraction) -> None:
        agent = self.agents[req.agent_id]
        # Unblock any intention waiting on this request.
        for it in agent.intentions:
            if it.status == "blocked" and it.waiting_on == req.request_id:
                it.status = "running"
                it.waiting_on = None
        agent.event_queue.append(
            BdiEvent(
                kind="feedback-received",
                tick=self.world.tick,
                agent=req.agent_id,
                feedback={"request_id": req.request_id, "verdict": hi.verdict},
            )
        )
        subject = req.subject
        kind = subject.get("kind")
        if kind == "victim-sighting":
            victim = subject.get("victim", "")
            if hi.verdict == "confirm":
                self._assign_tracking(
                    req.agent_id,
                    victim,
                    subject.get("x", 0.0),
                    subject.get("y", 0.0),
                    source=Source("human", hi.issuer),
                )
            elif hi.verdict == "refute":
                self.victim_status[victim] = {"state": "dismissed", "assigned": None}
            elif hi.verdict == "amend":
                self._apply_amendments(req.agent_id, subject, hi.amendments or {})
        elif kind == "duplicate-ambiguity":
            victim = subject.get("victim", "")
            if hi.verdict == "confirm":
                self._assign_tracking(
                    req.agent_id,
                    victim,
                    subject.get("x", 0.0),
                    subject.get("y", 0.0),
                    source=Source("human", hi.issuer),
                )
            elif hi.verdict == "refute":
                self.victim_status[victim] = {"state": "dismissed", "assigned": None}
            elif hi.verdict == "amend":
                self._apply_amendments(req.agent_id, subject, hi.amendments or {})
        elif kind == "replacement-window":
            h = self._open_handover_for(subject.get("victim", ""))
            if h is not None:
                if hi.verdict == "confirm":
                    self._commit_handover(h)
                elif hi.verdict == "refute":
                    h.resolved = True
        elif hi.verdict == "amend":
            self._apply_amendments(req.agent_id, subject, hi.amendments or {})

    def _apply_amendments(self, agent_id: str, subject: dict[str, Any], amendments: dict[str, Any]) -> None:
        beliefs = [Belief.from_dict(b) for b in amendments.get("beliefs", [])]
        if beliefs:
            self.merge_beliefs(beliefs)
        if amendments.get("inspect"):
            agent = self.agents[agent_id]
            gid = f"inspect-{self.world.tick}"
            if agent.goal(gid) is None:
                adopt_goal(
                    agent,
                    GoalInstance(
                        goal_id=gid,
                        name="inspect",
                        goal_type="perform",
                        parameters={"x": subject.get("x", 0.0), "y": subject.get("y", 0.0)},
                    ),
                )
                self.emit("goal-adopted", {"goal_id": gid, "name": "inspect"}, agent_id)
        if amendments.get("no_delivery"):
            victim = amendments["no_delivery"]
            self.victim_status.setdefault(victim, {"state": "pending", "assigned": None})
            self.victim_status[victim]["no_delivery"] = True
        params = amendments.get("parameters")
        if params:
            try:
                apply_feedback(self.agents[agent_id], params["target"], params["updates"])
            except (KeyError, ValueError) as exc:
                self.emit("error", {"error": f"feedback parameters rejected: {exc}"}, agent_id)

    # -- tracking / coordination ---------------------------------------

    def _assign_tracking(
        self, agent_id: str, victim_id: str, x: float, y: float, source: Source
    ) -> None:
        tick = self.world.tick
        self.victim_status.setdefault(victim_id, {})
        self.victim_status[victim_id].update({"state": "tracking", "assigned": agent_id})
        level = 2 if source.kind == "human" else 1
        self.merge_beliefs(
            [
                Belief(f"victim.{victim_id}.position", 1, position(x, y), source, tick),
                Belief(f"victim.{victim_id}.detected", level, boolean(True), source, tick),
            ]
        )
        agent = self.agents[agent_id]
        agent.kb.assert_belief(
            Belief("self.tracking", 2, ident(victim_id), Source("agent", agent_id), tick)
        )
        gid = f"track-{victim_id}"
        g = agent.goal(gid)
        if g is None or g.state in ("achieved", "aborted"):
            adopt_goal(
                agent,
                GoalInstance(
                    goal_id=gid,
                    name="track_victim",
                    goal_type="maintain",
                    parameters={"victim": victim_id, "x": x, "y": y},
                ),
            )
            self.emit(
                "goal-adopted",
                {"goal_id": gid, "name": "track_victim", "parameters": {"victim": victim_id, "x": x, "y": y}},
                agent_id,
            )

    def _release_tracking(self, agent_id: str, victim_id: str) -> None:
        agent = self.agents[agent_id]
        gid = f"track-{victim_id}"
        g = agent.goal(gid)
        if g is not None and g.state in ("active", "suspended"):
            drop_goal(agent, gid, "aborted")
            self.emit("goal-dropped", {"goal_id": gid, "name": "track_victim", "state": "aborted"}, agent_id)
        agent.kb.assert_belief(
            Belief("self.tracking", 2, ident("none"), Source("agent", agent_id), self.world.tick)
        )

    def _open_handover_for(self, victim_id: str) -> PendingHandover | None:
        for h in self.handovers:
            if not h.resolved and h.victim_id == victim_id:
                return h
        return None

    def request_replacement(self, requester: str, goal_id: str) -> None:
        """Coordination: pick the nearest permitted capable UAV and open
        a human-overridable window before the handover commits."""
        agent = self.agents[requester]
        tracking = agent.kb.get("self.tracking")
        victim_id = str(tracking.value.value) if tracking is not None else ""
        if not victim_id or victim_id == "none":
            return
        status = self.victim_status.get(victim_id, {})
        vb = agent.kb.get(f"victim.{victim_id}.position")
        if vb is not None:
            tx, ty = vb.value.value["x"], vb.value.value["y"]
        else:
            tx, ty = self.world.uavs[requester].position()
        candidates = [
            ReplacementCandidate(
                agent_id=aid,
                x=self.world.uavs[aid].x,
                y=self.world.uavs[aid].y,
                permitted=self.permission_granted(aid, "act_as_replacement"),
                capable="camera" in self.world.uavs[aid].capabilities
                and not self.world.uavs[aid].landed,
            )
            for aid in sorted(self.agents)
        ]
        chosen, rows = select_replacement(candidates, requester, tx, ty)
        inputs = [
            {"key": f"uav.{c.agent_id}.position", "value": {"x": round(c.x, 6), "y": round(c.y, 6)}, "version": 0}
            for c in candidates
        ]
        window = int(self.spec.constants["override_window"])
        decision_id = self.record_decision(
            {
                "decision_kind": "replacement",
                "agent": requester,
                "tick": self.world.tick,
                "event": {"kind": "internal-signal", "signal": "low_battery", "tick": self.world.tick},
                "inputs": inputs,
                "candidates": rows,
                "chosen": chosen,
                "rationale": (
                    f"Selected {chosen} as the nearest permitted replacement for "
                    f"tracking victim {victim_id}; operators may override within "
                    f"{window} ticks."
                    if chosen is not None
                    else f"No UAV is permitted and able to take over tracking victim "
                    f"{victim_id}; human intervention is required."
                ),
            }
        )
        subject = {
            "kind": "replacement-window",
            "victim": victim_id,
            "chosen": chosen or "",
            "requester": requester,
            "x": round(tx, 6),
            "y": round(ty, 6),
        }
        req, created = self.registry.open(requester, subject, self.world.tick)
        if created:
            self.emit("confirmation-opened", req.to_dict(), requester)
        if chosen is None:
            return
        self.handovers.append(
            PendingHandover(
                requester=requester,
                goal_id=goal_id,
                victim_id=victim_id,
                chosen=chosen,
                opened_tick=self.world.tick,
                commit_tick=self.world.tick + window,
                decision_id=decision_id,
            )
        )
        _ = status

    def _commit_handover(self, h: PendingHandover) -> None:
        h.resolved = True
        for req in self.registry.open_requests():
            if req.subject.get("kind") == "replacement-window" and req.subject.get("victim") == h.victim_id:
                self.registry.answer(req.request_id)
                self.emit(
                    "confirmation-answered",
                    {"request_id": req.request_id, "verdict": "auto-commit", "subject": req.subject},
                    h.requester,
                )
        if h.chosen is not None:
            vb = self.agents[h.requester].kb.get(f"victim.{h.victim_id}.position")
            x, y = (vb.value.value["x"], vb.value.value["y"]) if vb else (0.0, 0.0)
            self._assign_tracking(h.chosen, h.victim_id, x, y, Source("agent", h.requester))
        self._release_tracking(h.requester, h.victim_id)
        requester = self.agents[h.requester]
        gid = f"rtl-{self.world.tick}"
        if requester.goal(gid) is None:
            adopt_goal(requester, GoalInstance(goal_id=gid, name="rtl", goal_type="perform"))
            self.emit("goal-adopted", {"goal_id": gid, "name": "rtl"}, h.requester)

    def on_command(self, agent_id: str, cmd: dict[str, Any], tick: int) -> None:
        """Post-command hook: a replace command inside an open override
        window supersedes the automatic choice."""
        if cmd.get("kind") != "replace":
            return
        victim = cmd.get("victim", "")
        h = self._open_handover_for(victim)
        self.victim_status.setdefault(victim, {})
        self.victim_status[victim].update({"state": "tracking", "assigned": agent_id})
        agent = self.agents[agent_id]
        agent.kb.assert_belief(
            Belief("self.tracking", 2, ident(victim), Source("agent", agent_id), tick)
        )
        g = agent.goal(f"track-{victim}")
        if g is not None:
            # The replace command adopts the goal without coordinates;
            # fill them in from the shared victim-position belief.
            vb = agent.kb.get(f"victim.{victim}.position")
            if vb is not None:
                g.parameters.setdefault("x", vb.value.value["x"])
                g.parameters.setdefault("y", vb.value.value["y"])
        if h is None:
            return
        h.resolved = True
        h.overridden_by = agent_id
        for req in self.registry.open_requests():
            if req.subject.get("kind") == "replacement-window" and req.subject.get("victim") == victim:
                self.registry.answer(req.request_id)
                self.emit(
                    "confirmation-answered",
                    {"request_id": req.request_id, "verdict": "overridden", "subject": req.subject},
                    h.requester,
                )
        requester = self.agents[h.requester]
        for g in requester.goals:
            if g.name == "find_replacement" and g.state == "active":
                g.transition("suspended")
                for it in requester.intentions:
                    if it.goal_id == g.goal_id and it.status in ("running", "blocked"):
                        it.status = "cancelled"
                self.emit(
                    "goal-dropped",
                    {"goal_id": g.goal_id, "name": g.name, "state": "suspended"},
                    h.requester,
                )
        self._release_tracking(h.requester, victim)
        gid = f"rtl-{tick}"
        if requester.goal(gid) is None:
            adopt_goal(requester, GoalInstance(goal_id=gid, name="rtl", goal_type="perform"))
            self.emit("goal-adopted", {"goal_id": gid, "name": "rtl"}, h.requester)

    def open_confirmation(self, agent_id: str, subject: dict[str, Any]) -> str:
        req, created = self.registry.open(agent_id, subject, self.world.tick)
        if created:
            self.emit("confirmation-opened", req.to_dict(), agent_id)
        return req.request_id

    # -- detections ----------------------------------------------------

    def _next_detection_id(self) -> str:
        self._detection_counter += 1
        return f"det-{self._detection_counter}"

    def _process_detections(self, hits: list[dict[str, Any]]) -> None:
        """Gate this tick's sightings: dedup, then auto-track or ask."""
        fresh: list[Detection] = []
        victim_of: dict[str, str | None] = {}
        for hit in hits:
            victim_id = hit.get("victim_id")
            status = self.victim_status.get(victim_id or "", {}).get("state")
            det = Detection(
                detection_id=self._next_detection_id(),
                agent_id=hit["agent_id"],
                x=round(float(hit["x"]), 6),
                y=round(float(hit["y"]), 6),
                confidence=round(float(hit["confidence"]), 6),
                position_error=round(float(hit["position_error"]), 6),
                tick=self.world.tick,
            )
            if status in ("tracking", "pending", "dismissed"):
                if status == "tracking":
                    assigned = self.victim_status[victim_id]["assigned"]
                    if assigned is not None:
                        self.agents[assigned].kb.assert_belief(
                            Belief(
                                f"victim.{victim_id}.position",
                                1,
                                position(det.x, det.y),
                                Source("sensor", det.agent_id),
                                self.world.tick,
                            )
                        )
                continue
            self.emit("detection", det.to_dict(), det.agent_id)
            fresh.append(det)
            victim_of[det.detection_id] = victim_id
        if not fresh:
            return

        radius = self.spec.constants["dedup_radius"]
        accuracy_limit = self.spec.constants["accuracy_limit"]
        groups = deduplicate_detections(fresh, radius=radius, accuracy_limit=accuracy_limit)
        self.record_decision(
            {
                "decision_kind": "dedup",
                "agent": None,
                "tick": self.world.tick,
                "event": {"kind": "detections", "count": len(fresh), "tick": self.world.tick},
                "inputs": [{"key": d.detection_id, "value": d.to_dict(), "version": 0} for d in fresh],
                "candidates": [
                    {
                        "group_id": g.group_id,
                        "members": [d.detection_id for d in g.members],
                        "ambiguous": g.ambiguous,
                    }
                    for g in groups
                ],
                "chosen": None,
                "rationale": (
                    f"Grouped {len(fresh)} detections into {len(groups)} object(s) by "
                    f"single linkage within {radius:.0f} m plus both position errors."
                ),
            }
        )
        for g in groups:
            best = g.best
            victim_id = victim_of.get(best.detection_id) or f"obj-{g.group_id}"
            if g.ambiguous:
                self.victim_status[victim_id] = {"state": "pending", "assigned": None}
                subject = {
                    "kind": "duplicate-ambiguity",
                    "group": g.group_id,
                    "victim": victim_id,
                    "x": best.x,
                    "y": best.y,
                    "confidence": best.confidence,
                }
                self.open_confirmation(best.agent_id, subject)
                continue
            threshold = self.permission_constraint(best.agent_id, "track_without_confirmation")
            allowed = self.permission_granted(best.agent_id, "track_without_confirmation")
            if allowed and best.confidence >= (threshold if threshold is not None else 0.0):
                self._assign_tracking(
                    best.agent_id, victim_id, best.x, best.y, Source("sensor", best.agent_id)
                )
            else:
                self.victim_status[victim_id] = {"state": "pending", "assigned": None}
                subject = {
                    "kind": "victim-sighting",
                    "victim": victim_id,
                    "detection": best.detection_id,
                    "confidence": best.confidence,
                    "x": best.x,
                    "y": best.y,
                }
                self.open_confirmation(best.agent_id, subject)

    # -- rescue planning -----------------------------------------------

    def _plan_rescues(self) -> None:
        for victim_id in sorted(self.victim_status):
            status = self.victim_status[victim_id]
            if status.get("state") != "tracking" or status.get("assigned") is None:
                continue
            kb = self.agents[status["assigned"]].kb
            eta_belief = kb.get("boat.eta")
            if eta_belief is None:
                continue
            state = self.rescue_state.setdefault(victim_id, {"eta_version": -1, "choice": None})
            forced = bool(status.get("no_delivery"))
            if eta_belief.version == state["eta_version"] and state.get("forced") == forced:
                continue
            vb = kb.get(f"victim.{victim_id}.position")
            if vb is None:
                continue
            vx, vy = vb.value.value["x"], vb.value.value["y"]
            couriers = [
                DeliveryCandidate(
                    agent_id=aid,
                    x=self.world.uavs[aid].x,
                    y=self.world.uavs[aid].y,
                    speed=self.world.uavs[aid].max_speed,
                    permitted=self.permission_granted(aid, "auto_deliver")
                    and "flotation-payload" in self.world.uavs[aid].capabilities
                    and not self.world.uavs[aid].landed,
                )
                for aid in sorted(self.agents)
            ]
            decision = plan_rescue(
                victim_id,
                vx,
                vy,
                float(eta_belief.value.value),
                couriers,
                margin=self.spec.constants["margin"],
                handling_time=self.spec.constants["handling_time"],
                forced_stream_only=forced,
            )
            decision.rationale_id = self.record_decision(
                {
                    "decision_kind": "rescue-strategy",
                    "agent": status["assigned"],
                    "tick": self.world.tick,
                    "event": {"kind": "belief-changed", "key": "boat.eta", "tick": self.world.tick},
                    "inputs": [
                        {"key": "boat.eta", "value": eta_belief.value.to_dict(), "version": eta_belief.version},
                        {"key": f"victim.{victim_id}.position", "value": vb.value.to_dict(), "version": vb.version},
                    ],
                    "candidates": [
                        {"agent": c.agent_id, "eligible": c.permitted} for c in couriers
                    ],
                    "chosen": decision.choice,
                    "rationale": decision.rationale,
                    "detail": decision.to_dict(),
                }
            )
            prev_choice = state.get("choice")
            state.update({"eta_version": eta_belief.version, "choice": decision.choice, "forced": forced})
            if decision.choice == "deliver-flotation" and prev_choice != "deliver-flotation":
                courier = self.agents[decision.delivery_agent]
                gid = f"deliver-{victim_id}"
                g = courier.goal(gid)
                if g is None or g.state in ("achieved", "aborted"):
                    adopt_goal(
                        courier,
                        GoalInstance(
                            goal_id=gid,
                            name="deliver_flotation",
                            goal_type="perform",
                            parameters={"victim": victim_id, "x": vx, "y": vy},
                        ),
                    )
                    self.emit(
                        "goal-adopted",
                        {"goal_id": gid, "name": "deliver_flotation", "parameters": {"victim": victim_id, "x": vx, "y": vy}},
                        decision.delivery_agent,
                    )

    # -- coverage (structural fire) ------------------------------------

    def _mapping_agents(self) -> list[str]:
        return sorted(
            aid for aid, a in self.agents.items() if a.role_name in self._coverage_roles
        )

    def _assign_faces(self, initial: bool = False) -> None:
        faces = self.spec.raw.get("faces", [])
        mappers = self._mapping_agents()
        if not faces or not mappers:
            return
        assignment = {face: mappers[i % len(mappers)] for i, face in enumerate(faces)}
        self._last_mappers = mappers
        self.record_decision(
            {
                "decision_kind": "coverage-assignment",
                "agent": None,
                "tick": self.world.tick,
                "event": {
                    "kind": "coverage",
                    "trigger": "mission-start" if initial else "role-change",
                    "tick": self.world.tick,
                },
                "inputs": [
                    {"key": f"uav.{aid}.role", "value": self.agents[aid].role_name, "version": 0}
                    for aid in sorted(self.agents)
                ],
                "candidates": [
                    {"face": face, "assignee": aid} for face, aid in assignment.items()
                ],
                "chosen": None,
                "rationale": (
                    f"Distributed {len(faces)} building faces across "
                    f"{len(mappers)} mapping UAV(s) round-robin so every face "
                    "stays covered."
                ),
            }
        )
        beliefs = [
            Belief(
                f"face.{face}.assignee",
                2,
                ident(aid),
                Source("agent", mappers[0]),
                self.world.tick,
            )
            for face, aid in assignment.items()
        ]
        self.merge_beliefs(beliefs)

    def _check_coverage(self) -> None:
        if not self.spec.raw.get("faces"):
            return
        mappers = self._mapping_agents()
        if mappers and mappers != getattr(self, "_last_mappers", mappers):
            self._assign_faces()
        self._last_mappers = mappers

    # -- script --------------------------------------------------------

    def _apply_script(self) -> None:
        t = self.world.tick
        while self._script_idx < len(self.spec.script) and self.spec.script[self._script_idx]["tick"] <= t:
            entry = self.spec.script[self._script_idx]
            self._script_idx += 1
            occ = entry["do"]
            kind = occ["kind"]
            if kind == "inject-interaction":
                hi = HumanInteraction.from_dict(occ["interaction"])
                self.emit(
                    "interaction-received",
                    {"interaction": hi.to_dict(), "origin": "script", "admitted_tick": t},
                )
                self._apply_interaction(hi)
            elif kind == "force-detection":
                victim = self.world.victim(occ.get("victim", ""))
                x = occ.get("x", victim.x if victim else 0.0)
                y = occ.get("y", victim.y if victim else 0.0)
                self._forced_hits.append(
                    {
                        "agent_id": occ["agent"],
                        "victim_id": occ.get("victim"),
                        "x": x,
                        "y": y,
                        "confidence": occ["confidence"],
                        "position_error": occ.get("position_error", self.world.sensor.error_base),
                    }
                )
            elif kind == "place-victim":
                v = occ["victim"]
                self.world.victims.append(
                    Victim(
                        victim_id=v["victim_id"],
                        x=float(v["x"]),
                        y=float(v["y"]),
                        drift_x=float(v.get("drift_x", 0.0)),
                        drift_y=float(v.get("drift_y", 0.0)),
                    )
                )
            elif kind == "set-wind":
                for v in self.world.victims:
                    v.drift_x = float(occ.get("drift_x", 0.0))
                    v.drift_y = float(occ.get("drift_y", 0.0))
            elif kind == "recharge":
                uav = self.world.uavs.get(occ["agent"])
                if uav is not None:
                    uav.battery = float(occ["battery"])

    # -- transcript ----------------------------------------------------

    def add_transcript(self, transcript: list[tuple[int, HumanInteraction]]) -> None:
        last = -1
        for tick, hi in transcript:
            if tick < last:
                raise MalformedInteraction("transcript must be sorted by tick")
            if not isinstance(hi, HumanInteraction):
                raise MalformedInteraction("transcript entries must be interactions")
            last = tick
        self.transcript = list(transcript)

    def _apply_transcript(self) -> None:
        t = self.world.tick
        while self._transcript_idx < len(self.transcript) and self.transcript[self._transcript_idx][0] <= t:
            _, hi = self.transcript[self._transcript_idx]
            self._transcript_idx += 1
            self.emit(
                "interaction-received",
                {"interaction": hi.to_dict(), "origin": "transcript", "admitted_tick": t},
            )
            self._apply_interaction(hi)

    # -- the tick ------------------------------------------------------

    def _reasoning_context(self) -> ReasoningContext:
        return ReasoningContext(
            permission_granted=self.permission_granted,
            agent_position=lambda aid: self.world.uavs[aid].position(),
            home_position=lambda aid: (self.world.uavs[aid].home_x, self.world.uavs[aid].home_y),
            agent_capabilities=lambda aid: self.world.uavs[aid].capabilities,
            open_confirmation=self.open_confirmation,
            request_replacement=self.request_replacement,
            record_decision=self.record_decision,
            emit=self.emit,
            on_command=self.on_command,
        )

    def step(self) -> None:
        if self.status != "running":
            return
        t = self.world.tick
        self._apply_script()
        self._apply_transcript()
        for q in self.pending:
            if q.admitted_tick <= t:
                self._apply_interaction(q.interaction)
        self.pending = [q for q in self.pending if q.admitted_tick > t]

        for req in self.registry.expired(t):
            self.emit(
                "confirmation-answered",
                {"request_id": req.request_id, "verdict": "expired", "subject": req.subject},
                req.agent_id,
            )
            agent = self.agents.get(req.agent_id)
            if agent is not None:
                for it in agent.intentions:
                    if it.status == "blocked" and it.waiting_on == req.request_id:
                        it.status = "running"
                        it.waiting_on = None

        for h in list(self.handovers):
            if not h.resolved and t >= h.commit_tick:
                self._commit_handover(h)

        hits = list(self._forced_hits)
        self._forced_hits = []
        for aid in sorted(self.agents):
            for dh in simulate_detection(self.world.uavs[aid], self.world):
                hits.append(
                    {
                        "agent_id": dh.agent_id,
                        "victim_id": dh.victim_id,
                        "x": dh.x,
                        "y": dh.y,
                        "confidence": dh.confidence,
                        "position_error": dh.position_error,
                    }
                )
        self._process_detections(hits)
        self._plan_rescues()

        ctx = self._reasoning_context()
        actions: list[PrimitiveAction] = []
        for aid in sorted(self.agents):
            actions.extend(reasoning_step(self.agents[aid], t, ctx))

        for act in actions:
            if act.verb == "broadcast":
                sender = self.agents[act.agent]
                beliefs = sender.kb.query(act.args.get("pattern", "*"))
                self.merge_beliefs(beliefs, [a for a in sorted(self.agents) if a != act.agent])

        payloads, signals = step_world(self.world, actions)
        for p in payloads:
            if "error" in p:
                self.emit("error", p)
            else:
                self.emit("action-executed", p, p.get("executor"))
        for aid, signal in signals:
            agent = self.agents[aid]
            agent.event_queue.append(
                BdiEvent(kind="internal-signal", tick=self.world.tick, agent=aid, signal=signal)
            )
            if signal == "low_battery":
                changes = agent.kb.assert_belief(
                    Belief(
                        "self.battery",
                        1,
                        scalar(self.world.uavs[aid].battery),
                        Source("sensor", aid),
                        self.world.tick,
                    )
                )
                for ch in changes:
                    self.emit("belief-changed", ch, aid)
                    agent.event_queue.append(
                        BdiEvent(kind="belief-changed", tick=self.world.tick, agent=aid, key=ch["key"])
                    )

        self._check_coverage()

        if self.world.tick >= self.max_ticks or self._quiescent():
            self.status = "finished"

    def _quiescent(self) -> bool:
        if self._script_idx < len(self.spec.script) or self._transcript_idx < len(self.transcript):
            return False
        if self.pending or self.registry.open_requests():
            return False
        if any(not h.resolved for h in self.handovers):
            return False
        for agent in self.agents.values():
            if agent.event_queue or agent.intentions:
                return False
            if any(g.state in ("active", "suspended") for g in agent.goals):
                return False
        return True

    def run(self) -> list[MissionEvent]:
        while self.status == "running":
            self.step()
        return self.log

    # -- snapshots ------------------------------------------------------

    def explain(self, decision_id: str) -> dict[str, Any]:
        return self.decisions.explain(decision_id)

    def state_summary(self) -> dict[str, Any]:
        """Mission state in the same shape the replay fold produces."""
        beliefs = {
            aid: {
                key: {
                    "value": b.value.to_dict(),
                    "level": b.level,
                    "source": b.source.to_dict(),
                    "version": b.version,
                }
                for key, b in sorted(agent.kb.entries.items())
            }
            for aid, agent in sorted(self.agents.items())
        }
        goals = {
            aid: {
                g.goal_id: {"name": g.name, "state": g.state}
                for g in agent.goals
            }
            for aid, agent in sorted(self.agents.items())
        }
        uavs = {
            aid: {
                "x": round(u.x, 6),
                "y": round(u.y, 6),
                "battery": round(u.battery, 6),
                "mode": u.mode,
                "landed": u.landed,
            }
            for aid, u in sorted(self.world.uavs.items())
        }
        requests = {r.request_id: r.to_dict() for r in self.registry.requests.values()}
        return {
            "tick": self.world.tick,
            "seq": self._seq,
            "status": self.status,
            "beliefs": beliefs,
            "goals": goals,
            "uavs": uavs,
            "requests": requests,
            "permissions": dict(sorted(self.permission_overlay.items())),
            "decisions": dict(sorted(self.decisions.records.items())),
        }


def run_headless(
    spec: ScenarioSpec,
    transcript: list[tuple[int, HumanInteraction]] | None = None,
    max_ticks: int = 300,
) -> Mission:
    """Deterministic full run; the returned mission holds the event log."""
    mission = Mission(spec, max_ticks=max_ticks)
    mission.add_transcript(transcript or [])
    mission.run()
    return mission


def stream_events(mission: Mission, from_seq: int = 1) -> Iterator[MissionEvent]:
    """Ordered event feed from a given sequence number."""
    for ev in mission.log:
        if ev.seq >= from_seq:
            yield ev


def extract_transcript(events: list[MissionEvent]) -> list[tuple[int, HumanInteraction]]:
    """Recover the operator transcript from a log: every non-scripted
    interaction, stamped with its admission tick."""
    out: list[tuple[int, HumanInteraction]] = []
    for ev in events:
        if ev.kind != "interaction-received":
            continue
        if ev.payload.get("origin") == "script":
            continue
        out.append(
            (ev.payload.get("admitted_tick", ev.tick), HumanInteraction.from_dict(ev.payload["interaction"]))
        )
    return out
