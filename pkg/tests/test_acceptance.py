"""End-to-end behavioral suite over the shipped scenarios.

Each test exercises one externally stated guarantee of the engine, from
permission-gated safety behavior through deterministic replay, using
only the public package API.
"""

from __future__ import annotations

import random
import time

import pytest

from hotl.engine import run_headless
from hotl.plans import applicable_plans, select_plan
from hotl.replay import verify
from hotl.scenario import load_shipped, load_transcript, shipped_transcript_path

from dispatch_helpers import (
    oracle_applicable,
    random_event,
    random_grants,
    random_kb,
    random_library,
)

SCENARIOS = [
    "s1_rescue_strategy",
    "s2_strainers",
    "s3_confirmation",
    "s4_dedup",
    "s5_rtl_override",
    "f1_fire_mapping",
]


@pytest.fixture(scope="module")
def golden():
    """One headless run per shipped scenario with its shipped transcript."""
    runs = {}
    for name in SCENARIOS:
        spec = load_shipped(name)
        transcript = load_transcript(shipped_transcript_path(name))
        runs[name] = run_headless(spec, transcript)
    return runs


def events_of(mission, kind):
    return [e for e in mission.log if e.kind == kind]


def test_low_battery_rtl_obeys_permission(golden):
    # granted: the low-battery signal selects rtl; revoked: it may not
    t0 = time.perf_counter()
    spec = load_shipped("s5_rtl_override")
    granted = run_headless(spec, [])
    revoked = golden["s5_rtl_override"]
    assert time.perf_counter() - t0 < 5.0

    granted_plans = [e.payload["plan_id"] for e in events_of(granted, "plan-selected")]
    assert "rtl" in granted_plans
    rtl_ev = next(
        e for e in events_of(granted, "plan-selected") if e.payload["plan_id"] == "rtl"
    )
    assert rtl_ev.payload["event"]["signal"] == "low_battery"

    revoked_plans = [e.payload["plan_id"] for e in events_of(revoked, "plan-selected")]
    assert "rtl" not in revoked_plans
    assert "continue-tracking" in revoked_plans


def test_replacement_override_event_order(golden):
    m = golden["s4_dedup"]
    opened = next(
        e
        for e in events_of(m, "confirmation-opened")
        if e.payload["subject"]["kind"] == "replacement-window"
    )
    received = next(
        e
        for e in events_of(m, "interaction-received")
        if e.payload["interaction"].get("command", {}).get("kind") == "replace"
    )
    adopted = next(
        e
        for e in events_of(m, "goal-adopted")
        if e.agent == "uav2" and e.payload["name"] == "track_victim"
    )
    suspended = next(
        e
        for e in events_of(m, "goal-dropped")
        if e.agent == "uav1" and e.payload.get("state") == "suspended"
    )
    assert opened.seq < received.seq < adopted.seq < suspended.seq


def test_confirmation_gating_and_broadcast(golden):
    m = golden["s3_confirmation"]

    sighting = next(
        e
        for e in events_of(m, "confirmation-opened")
        if e.payload["subject"]["kind"] == "victim-sighting"
    )
    assert sighting.payload["subject"]["confidence"] == pytest.approx(0.55)
    answered = next(
        e
        for e in events_of(m, "confirmation-answered")
        if e.payload["request_id"] == sighting.payload["request_id"]
    )
    track_v1 = next(
        e for e in events_of(m, "goal-adopted") if e.payload["goal_id"] == "track-v1"
    )
    # no track goal for the 0.55 sighting before the operator confirms
    assert answered.seq < track_v1.seq

    # the 0.9 detection needs no request and auto-tracks immediately
    track_v2 = next(
        e for e in events_of(m, "goal-adopted") if e.payload["goal_id"] == "track-v2"
    )
    assert not any(
        e.payload["subject"].get("victim") == "v2"
        for e in events_of(m, "confirmation-opened")
    )
    for agent_id in ("uav1", "uav2"):
        first = next(
            e
            for e in events_of(m, "belief-changed")
            if e.agent == agent_id and e.payload["key"] == "victim.v2.position"
        )
        assert first.tick - track_v2.tick <= 2


def test_rescue_strategy_flips_with_boat_eta(golden):
    m = golden["s1_rescue_strategy"]
    rescue = [
        r
        for r in sorted(m.decisions.records.values(), key=lambda r: r["decision_id"])
        if r["decision_kind"] == "rescue-strategy"
    ]
    choices = [r["chosen"] for r in rescue]
    assert choices[0] == "stream-only"
    assert "deliver-flotation" in choices[1:]
    for r in rescue:
        full = m.explain(r["decision_id"])
        assert full["rationale"]
        assert full["inputs"] and full["candidates"]


def test_dedup_groups_and_ambiguity_request(golden):
    m = golden["s4_dedup"]
    dedups = [
        r
        for r in sorted(m.decisions.records.values(), key=lambda r: r["decision_id"])
        if r["decision_kind"] == "dedup"
    ]
    paired = next(r for r in dedups if r["event"]["count"] == 2)
    assert len(paired["candidates"]) == 1
    assert len(paired["candidates"][0]["members"]) == 2
    assert not paired["candidates"][0]["ambiguous"]
    v1_tracks = [
        e
        for e in events_of(m, "goal-adopted")
        if e.payload.get("parameters", {}).get("victim") == "v1"
    ]
    assert len(v1_tracks[:1]) == 1  # exactly one automatic assignment
    assert sum(1 for e in v1_tracks if e.tick == paired["tick"]) == 1

    ambiguity = [
        e
        for e in events_of(m, "confirmation-opened")
        if e.payload["subject"]["kind"] == "duplicate-ambiguity"
    ]
    assert len(ambiguity) == 1


def test_smoke_report_triggers_fast_replanning(golden):
    m = golden["f1_fire_mapping"]
    reported = next(
        e
        for e in events_of(m, "interaction-received")
        if e.payload["interaction"].get("belief", {}).get("key") == "region.smoke.position"
    )
    switch = next(
        e for e in events_of(m, "plan-selected") if e.payload["plan_id"] == "switch-thermal"
    )
    recover = next(
        r
        for r in sorted(m.decisions.records.values(), key=lambda r: r["decision_id"])
        if r["decision_kind"] == "coverage-assignment"
        and r["event"]["trigger"] == "role-change"
    )
    assert switch.tick - reported.tick <= 3
    assert recover["tick"] - reported.tick <= 3

    faces = m.spec.raw["faces"]
    assigned = {c["face"]: c["assignee"] for c in recover["candidates"]}
    assert set(assigned) == set(faces)
    assert "uav1" not in assigned.values()  # the thermal UAV left the mapping pool


def test_replay_is_byte_identical_for_all_scenarios(golden):
    t0 = time.perf_counter()
    for name in SCENARIOS:
        spec = load_shipped(name)
        ok, problems = verify(spec, golden[name].log)
        assert ok, f"{name}: {problems}"
    assert time.perf_counter() - t0 < 30.0


def test_dispatcher_matches_brute_force_oracle():
    rnd = random.Random(77)
    for _ in range(1000):
        library = random_library(rnd)
        ev = random_event(rnd)
        kb = random_kb(rnd)
        grants = random_grants(rnd)

        granted = lambda key: grants.get(key, True)
        candidates = applicable_plans(library, ev, kb, granted)
        assert [p.plan_id for p in candidates] == oracle_applicable(library, ev, kb, grants)

        chosen = select_plan(candidates)
        if candidates:
            assert chosen in candidates
            top = max(p.priority for p in candidates)
            # declaration order breaks priority ties
            assert chosen.plan_id == next(
                p.plan_id for p in candidates if p.priority == top
            )
        else:
            assert chosen is None

        # revoking permissions can only shrink the applicable set
        none_granted = applicable_plans(library, ev, kb, lambda key: False)
        assert {p.plan_id for p in none_granted} <= {p.plan_id for p in candidates}


def test_every_logged_decision_is_accounted_for(golden):
    coordination = {"replacement", "dedup", "rescue-strategy", "coverage-assignment"}
    for name, m in golden.items():
        contested = sum(
            1
            for e in events_of(m, "plan-selected")
            if e.payload["candidate_count"] >= 2
        )
        logged = events_of(m, "decision-logged")
        unhandled = sum(
            1 for e in logged if e.payload["decision_kind"] == "unhandled-event"
        )
        coordinated = sum(
            1 for e in logged if e.payload["decision_kind"] in coordination
        )
        assert contested + unhandled + coordinated == len(logged), name
