"""Event-log replay: fold a JSONL log back into mission state.

The fold mirrors `Mission.state_summary`, so a replayed log can be
checked for equality against the live final state, and `verify` can
re-run a scenario with the extracted transcript and byte-compare logs.
"""

from __future__ import annotations

from typing import Any

from .engine import Mission, extract_transcript, run_headless
from .events import MissionEvent, event_to_line, read_log
from .scenario import ScenarioSpec


def empty_fold_state() -> dict[str, Any]:
    return {
        "tick": 0,
        "seq": 0,
        "status": "running",
        "beliefs": {},
        "goals": {},
        "uavs": {},
        "requests": {},
        "permissions": {},
        "decisions": {},
    }


def fold_event(state: dict[str, Any], ev: MissionEvent) -> dict[str, Any]:
    """Apply one event to the fold state (mutates and returns it)."""
    state["seq"] = ev.seq
    state["tick"] = max(state["tick"], ev.tick)
    p = ev.payload
    if ev.kind == "belief-changed":
        agent = ev.agent or ""
        state["beliefs"].setdefault(agent, {})[p["key"]] = {
            "value": p["value"],
            "level": p["level"],
            "source": p["source"],
            "version": p["version"],
        }
    elif ev.kind == "goal-adopted":
        agent = ev.agent or ""
        state["goals"].setdefault(agent, {})[p["goal_id"]] = {
            "name": p["name"],
            "state": "active",
        }
    elif ev.kind == "goal-dropped":
        agent = ev.agent or ""
        goals = state["goals"].setdefault(agent, {})
        entry = goals.setdefault(p["goal_id"], {"name": p["name"], "state": "active"})
        entry["state"] = p.get("state", "aborted")
    elif ev.kind == "action-executed":
        agent = p.get("executor")
        if agent is not None:
            uav = state["uavs"].setdefault(agent, {})
            if "x" in p:
                uav["x"] = p["x"]
                uav["y"] = p["y"]
            if p.get("verb") == "land":
                uav["landed"] = True
            if p.get("verb") == "set-mode":
                uav["mode"] = p["args"]["mode"]
            if p.get("verb") == "rtl":
                uav["mode"] = "rtl"
    elif ev.kind == "permission-changed":
        state["permissions"][f"{p['scope']}:{p['key']}"] = p["new"]
    elif ev.kind == "confirmation-opened":
        state["requests"][p["request_id"]] = dict(p)
    elif ev.kind == "confirmation-answered":
        req = state["requests"].get(p["request_id"])
        if req is not None:
            req["state"] = "expired" if p.get("verdict") == "expired" else "answered"
    elif ev.kind == "decision-logged":
        state["decisions"][p["decision_id"]] = dict(p)
    return state


def fold_log(events: list[MissionEvent]) -> dict[str, Any]:
    state = empty_fold_state()
    for ev in events:
        fold_event(state, ev)
    return state


def replay(path: str) -> dict[str, Any]:
    """Reconstruct the final folded state from a persisted log file."""
    return fold_log(read_log(path))


def compare_fold_to_mission(fold: dict[str, Any], mission: Mission) -> list[str]:
    """Check replay-equivalence; returns human-readable mismatches."""
    live = mission.state_summary()
    problems: list[str] = []
    if fold["seq"] != live["seq"]:
        problems.append(f"seq: fold {fold['seq']} != live {live['seq']}")
    for agent, entries in live["beliefs"].items():
        folded = fold["beliefs"].get(agent, {})
        for key, entry in entries.items():
            # Beliefs seeded by the scenario are not change events, so
            # only assert over keys the log actually announced.
            if key in folded and folded[key] != entry:
                problems.append(f"belief {agent}/{key}: fold {folded[key]} != live {entry}")
        for key in folded:
            if key not in entries:
                problems.append(f"belief {agent}/{key} folded but absent live")
    for agent, goals in fold["goals"].items():
        for gid, g in goals.items():
            live_g = live["goals"].get(agent, {}).get(gid)
            if live_g is None:
                problems.append(f"goal {agent}/{gid} folded but absent live")
            elif live_g != g:
                problems.append(f"goal {agent}/{gid}: fold {g} != live {live_g}")
    for agent, uav in fold["uavs"].items():
        live_u = live["uavs"].get(agent)
        if live_u is None:
            problems.append(f"uav {agent} folded but absent live")
            continue
        for fld in ("x", "y"):
            if fld in uav and abs(uav[fld] - live_u[fld]) > 1e-6:
                problems.append(f"uav {agent}.{fld}: fold {uav[fld]} != live {live_u[fld]}")
        if uav.get("landed") and not live_u["landed"]:
            problems.append(f"uav {agent} folded landed but live airborne")
    if fold["permissions"] != live["permissions"]:
        problems.append("permission overlays differ")
    if set(fold["decisions"]) != set(live["decisions"]):
        problems.append("decision ids differ")
    for rid, req in fold["requests"].items():
        live_r = live["requests"].get(rid)
        if live_r is None:
            problems.append(f"request {rid} folded but absent live")
        elif live_r["state"] != req["state"]:
            problems.append(f"request {rid}: fold {req['state']} != live {live_r['state']}")
    return problems


def verify(
    spec: ScenarioSpec, events: list[MissionEvent], max_ticks: int = 300
) -> tuple[bool, list[str]]:
    """Re-run the scenario with the transcript extracted from the log and
    byte-compare; also checks replay-fold equivalence."""
    transcript = extract_transcript(events)
    mission = run_headless(spec, transcript, max_ticks=max_ticks)
    original = [event_to_line(ev) for ev in events]
    rerun = [event_to_line(ev) for ev in mission.log]
    problems: list[str] = []
    if original != rerun:
        n = min(len(original), len(rerun))
        for i in range(n):
            if original[i] != rerun[i]:
                problems.append(f"line {i + 1} differs:\n  log:   {original[i]}\n  rerun: {rerun[i]}")
                break
        if len(original) != len(rerun):
            problems.append(f"length differs: log {len(original)} lines, rerun {len(rerun)}")
    problems.extend(compare_fold_to_mission(fold_log(events), mission))
    return (not problems), problems
