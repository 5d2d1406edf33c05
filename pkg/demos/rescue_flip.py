"""Walkthrough: human information changes the rescue strategy.

The tracker knows the rescue boat arrives in 100 s, so delivering a
flotation device (120 s away) is pointless and the engine chooses to
stream video only. When an operator reports the boat is actually 600 s
out, the engine re-plans and dispatches the courier UAV.
"""

from __future__ import annotations

from hotl.engine import run_headless
from hotl.scenario import load_shipped, load_transcript, shipped_transcript_path


def main() -> None:
    name = "s1_rescue_strategy"
    transcript = load_transcript(shipped_transcript_path(name))
    mission = run_headless(load_shipped(name), transcript)

    for rec in sorted(mission.decisions.records.values(), key=lambda r: r["decision_id"]):
        if rec["decision_kind"] != "rescue-strategy":
            continue
        print(f"tick {rec['tick']:3d}: chose {rec['chosen']}")
        print(f"  rationale: {rec['rationale']}")

    deliveries = [
        e for e in mission.log
        if e.kind == "goal-adopted" and e.payload["name"] == "deliver_flotation"
    ]
    assert deliveries, "expected the courier to adopt a delivery goal"
    ev = deliveries[0]
    print(f"tick {ev.tick:3d}: {ev.agent} adopted {ev.payload['goal_id']}")


if __name__ == "__main__":
    main()
