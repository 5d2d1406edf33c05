"""Multi-agent protocols: replacement selection, detection
deduplication, and rescue-strategy planning.

All three are pure functions of their inputs; the engine invokes them
inside the tick and logs one rationale record per decision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .beliefs import KnowledgeBase

DEFAULT_DEDUP_RADIUS = 10.0
DEFAULT_ACCURACY_LIMIT = 15.0
DEFAULT_RESCUE_MARGIN = 30.0
DEFAULT_HANDLING_TIME = 20.0
DEFAULT_OVERRIDE_WINDOW = 10


@dataclass(frozen=True)
class Detection:
    detection_id: str
    agent_id: str
    x: float
    y: float
    confidence: float
    position_error: float
    tick: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")
        if self.position_error < 0:
            raise ValueError("position-error must be non-negative")

    def to_dict(self) -> dict[str, Any]:
        return {
            "detection_id": self.detection_id,
            "agent_id": self.agent_id,
            "x": self.x,
            "y": self.y,
            "confidence": self.confidence,
            "position_error": self.position_error,
            "tick": self.tick,
        }


@dataclass
class DetectionGroup:
    group_id: str
    members: list[Detection]
    ambiguous: bool

    @property
    def best(self) -> Detection:
        """Representative member: highest confidence, then lowest agent id."""
        return min(self.members, key=lambda d: (-d.confidence, d.agent_id, d.detection_id))

    def centroid(self) -> tuple[float, float]:
        n = len(self.members)
        return (sum(d.x for d in self.members) / n, sum(d.y for d in self.members) / n)


def deduplicate_detections(
    detections: list[Detection],
    radius: float = DEFAULT_DEDUP_RADIUS,
    accuracy_limit: float = DEFAULT_ACCURACY_LIMIT,
) -> list[DetectionGroup]:
    """Single-linkage grouping of same-object sightings.

    Two detections link iff their distance is within `radius` plus both
    position errors; linkage is closed transitively. A group is marked
    ambiguous when any member's position error exceeds `accuracy_limit`,
    which is the cue for requesting human disambiguation.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    items = sorted(detections, key=lambda d: d.detection_id)
    parent = list(range(len(items)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(i: int, j: int) -> None:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)

    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            a, b = items[i], items[j]
            limit = radius + a.position_error + b.position_error
            if math.hypot(a.x - b.x, a.y - b.y) <= limit:
                union(i, j)

    clusters: dict[int, list[Detection]] = {}
    for i, d in enumerate(items):
        clusters.setdefault(find(i), []).append(d)

    groups: list[DetectionGroup] = []
    for root in sorted(clusters):
        members = clusters[root]
        groups.append(
            DetectionGroup(
                group_id="g:" + min(m.detection_id for m in members),
                members=members,
                ambiguous=any(m.position_error > accuracy_limit for m in members),
            )
        )
    return groups


@dataclass(frozen=True)
class ReplacementCandidate:
    agent_id: str
    x: float
    y: float
    permitted: bool
    capable: bool


def select_replacement(
    candidates: list[ReplacementCandidate],
    requester: str,
    task_x: float,
    task_y: float,
) -> tuple[str | None, list[dict[str, Any]]]:
    """Pick the nearest permitted, capable agent other than the requester.

    Ties break toward the lower agent id. Returns (choice, rationale
    rows covering every considered agent); None when no agent qualifies.
    """
    rows: list[dict[str, Any]] = []
    best: tuple[float, str] | None = None
    for c in sorted(candidates, key=lambda c: c.agent_id):
        if c.agent_id == requester:
            rows.append({"agent": c.agent_id, "eligible": False, "reason": "is the requester"})
            continue
        if not c.permitted:
            rows.append(
                {"agent": c.agent_id, "eligible": False, "reason": "act_as_replacement not granted"}
            )
            continue
        if not c.capable:
            rows.append({"agent": c.agent_id, "eligible": False, "reason": "missing capability"})
            continue
        dist = math.hypot(c.x - task_x, c.y - task_y)
        rows.append({"agent": c.agent_id, "eligible": True, "distance": round(dist, 6)})
        if best is None or (dist, c.agent_id) < best:
            best = (dist, c.agent_id)
    return (best[1] if best is not None else None), rows


@dataclass
class RescueDecision:
    victim_id: str
    boat_eta: float
    delivery_eta: float | None
    choice: str  # deliver-flotation | stream-only
    delivery_agent: str | None
    rationale: str
    rationale_id: str = ""

    def to_dict(self) -> dict[str, Any]:
        return {
            "victim_id": self.victim_id,
            "boat_eta": self.boat_eta,
            "delivery_eta": self.delivery_eta,
            "choice": self.choice,
            "delivery_agent": self.delivery_agent,
            "rationale": self.rationale,
            "rationale_id": self.rationale_id,
        }


@dataclass(frozen=True)
class DeliveryCandidate:
    agent_id: str
    x: float
    y: float
    speed: float  # m/tick, ticks are seconds
    permitted: bool


def plan_rescue(
    victim_id: str,
    victim_x: float,
    victim_y: float,
    boat_eta: float,
    couriers: list[DeliveryCandidate],
    margin: float = DEFAULT_RESCUE_MARGIN,
    handling_time: float = DEFAULT_HANDLING_TIME,
    forced_stream_only: bool = False,
) -> RescueDecision:
    """Deliver a flotation device iff it beats the boat by the margin.

    The delivery ETA is straight-line travel time of the nearest
    permitted flotation-capable UAV plus a fixed handling time. A human
    verdict that the victim cannot receive the device forces stream-only.
    """
    best: tuple[float, str] | None = None
    for c in sorted(couriers, key=lambda c: c.agent_id):
        if not c.permitted:
            continue
        eta = math.hypot(c.x - victim_x, c.y - victim_y) / c.speed + handling_time
        if best is None or (eta, c.agent_id) < best:
            best = (eta, c.agent_id)

    if forced_stream_only:
        return RescueDecision(
            victim_id=victim_id,
            boat_eta=boat_eta,
            delivery_eta=best[0] if best else None,
            choice="stream-only",
            delivery_agent=None,
            rationale="Operator determined the victim cannot receive a flotation "
            "device; streaming imagery until the boat arrives.",
        )
    if best is None:
        return RescueDecision(
            victim_id=victim_id,
            boat_eta=boat_eta,
            delivery_eta=None,
            choice="stream-only",
            delivery_agent=None,
            rationale="No delivery-capable UAV is available; streaming imagery "
            "until the boat arrives.",
        )
    eta, agent = best
    if eta + margin < boat_eta:
        return RescueDecision(
            victim_id=victim_id,
            boat_eta=boat_eta,
            delivery_eta=eta,
            choice="deliver-flotation",
            delivery_agent=agent,
            rationale=(
                f"Delivery by {agent} (~{eta:.0f}s + {margin:.0f}s margin) beats the "
                f"boat (~{boat_eta:.0f}s); dispatching the flotation device."
            ),
        )
    return RescueDecision(
        victim_id=victim_id,
        boat_eta=boat_eta,
        delivery_eta=eta,
        choice="stream-only",
        delivery_agent=None,
        rationale=(
            f"Boat (~{boat_eta:.0f}s) arrives before a delivery could "
            f"(~{eta:.0f}s + {margin:.0f}s margin); streaming imagery instead."
        ),
    )


def boat_eta_from_kb(kb: KnowledgeBase) -> float | None:
    b = kb.get("boat.eta")
    if b is None:
        return None
    return float(b.value.value)


@dataclass
class PendingHandover:
    """An automatic replacement choice awaiting its override window."""

    requester: str
    goal_id: str
    victim_id: str
    chosen: str | None
    opened_tick: int
    commit_tick: int
    decision_id: str
    resolved: bool = False
    overridden_by: str | None = None
    extra: dict[str, Any] = field(default_factory=dict)
