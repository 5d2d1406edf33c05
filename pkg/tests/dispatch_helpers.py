"""Shared generators and an independent applicability oracle for
dispatcher tests: small random plan libraries, events, and belief
stores, plus a brute-force re-check of the applicability rule."""

from __future__ import annotations

import random

from hotl.beliefs import Belief, KnowledgeBase, Source, scalar
from hotl.plans import BdiEvent, Condition, PlanSpec, PlanStep, Trigger

SIGNALS = ["low_battery", "victim_detected", "gps_degraded"]
BELIEF_KEYS = ["self.battery", "victim.1.seen", "wind.speed", "area.priority", "boat.eta"]
PERMISSION_KEYS = ["auto_rtl", "act_as_replacement", "auto_deliver"]
OPS = ["eq", "ne", "lt", "le", "gt", "ge"]


def random_library(rnd: random.Random, max_plans: int = 4) -> list[PlanSpec]:
    n = rnd.randint(1, max_plans)
    plans = []
    for i in range(n):
        if rnd.random() < 0.7:
            trigger = Trigger(kind="internal-signal", signal=rnd.choice(SIGNALS + [None]))
        else:
            trigger = Trigger(
                kind="belief-changed",
                key_pattern=rnd.choice(BELIEF_KEYS + ["victim.*", None]),
            )
        precondition = [
            Condition(key=rnd.choice(BELIEF_KEYS), op=rnd.choice(OPS), value=rnd.randint(0, 5))
            for _ in range(rnd.randint(0, 2))
        ]
        plans.append(
            PlanSpec(
                plan_id=f"p{i}",
                trigger=trigger,
                body=[PlanStep("wait", {"ticks": 1})],
                precondition=precondition,
                required_permission=rnd.choice(PERMISSION_KEYS + [None, None]),
                priority=rnd.randint(0, 3),
            )
        )
    return plans


def random_event(rnd: random.Random) -> BdiEvent:
    if rnd.random() < 0.7:
        return BdiEvent(
            kind="internal-signal", tick=0, agent="uav1", signal=rnd.choice(SIGNALS)
        )
    return BdiEvent(
        kind="belief-changed", tick=0, agent="uav1", key=rnd.choice(BELIEF_KEYS)
    )


def random_kb(rnd: random.Random) -> KnowledgeBase:
    kb = KnowledgeBase(owner="uav1")
    for key in BELIEF_KEYS:
        if rnd.random() < 0.7:
            kb.assert_belief(
                Belief(key, 1, scalar(rnd.randint(0, 5)), Source("sensor", "uav1"), 0)
            )
    return kb


def random_grants(rnd: random.Random) -> dict[str, bool]:
    return {key: rnd.random() < 0.5 for key in PERMISSION_KEYS}


def oracle_applicable(
    library: list[PlanSpec],
    ev: BdiEvent,
    kb: KnowledgeBase,
    grants: dict[str, bool],
) -> list[str]:
    """Independent brute-force applicability check, written from the
    rule definition rather than sharing code with the dispatcher."""
    out = []
    for plan in library:
        t = plan.trigger
        if t.kind != ev.kind:
            continue
        if ev.kind == "internal-signal":
            if t.signal is not None and t.signal != ev.signal:
                continue
        if ev.kind == "belief-changed" and t.key_pattern is not None:
            pat = t.key_pattern
            if pat.endswith(".*"):
                if ev.key is None or not ev.key.startswith(pat[:-1]):
                    continue
            elif ev.key != pat:
                continue
        ok = True
        for cond in plan.precondition:
            entry = kb.get(cond.key)
            if entry is None:
                ok = False
                break
            v = entry.value.value
            ok = {
                "eq": v == cond.value,
                "ne": v != cond.value,
                "lt": v < cond.value,
                "le": v <= cond.value,
                "gt": v > cond.value,
                "ge": v >= cond.value,
            }[cond.op]
            if not ok:
                break
        if not ok:
            continue
        if plan.required_permission is not None and not grants.get(plan.required_permission, True):
            continue
        out.append(plan.plan_id)
    return out
