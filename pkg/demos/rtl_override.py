"""Walkthrough: adjustable autonomy around the return-to-launch behavior.

A single UAV is tracking a victim when its battery crosses the low
threshold. By default the higher-priority rtl plan wins and the UAV
heads home. If an operator revokes the auto_rtl permission first, the
dispatcher may no longer consider rtl and the UAV keeps tracking.
"""

from __future__ import annotations

from hotl.engine import run_headless
from hotl.interaction import HumanInteraction
from hotl.scenario import load_shipped


def selections(mission):
    return [
        (e.tick, e.payload["plan_id"])
        for e in mission.log
        if e.kind == "plan-selected"
    ]


def main() -> None:
    spec = load_shipped("s5_rtl_override")

    print("-- default permissions (auto_rtl granted) --")
    mission = run_headless(spec, [])
    for tick, plan in selections(mission):
        print(f"  tick {tick:3d}: dispatcher selected {plan}")

    print("-- operator revokes auto_rtl at tick 1 --")
    revoke = HumanInteraction.from_dict(
        {
            "kind": "changed-permission",
            "issuer": "op1",
            "change": {
                "key": "auto_rtl",
                "granted": False,
                "scope_kind": "mission",
                "issuer": "op1",
                "tick": 1,
            },
        }
    )
    mission = run_headless(spec, [(1, revoke)])
    for tick, plan in selections(mission):
        print(f"  tick {tick:3d}: dispatcher selected {plan}")
    assert all(plan != "rtl" for _, plan in selections(mission))
    print("rtl was never selected after the revocation.")


if __name__ == "__main__":
    main()
