"""Deterministic tick-based world: kinematics, battery, sensing.

One tick is one simulated second. A single seeded RNG stream is
consumed in a fixed order (agents ascending, sensors before kinematics)
so that a scenario plus an interaction transcript is a pure function of
its inputs.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any

from .agent import PrimitiveAction

DEFAULT_LOW_BATTERY_THRESHOLD = 20.0


@dataclass
class UavPhysical:
    agent_id: str
    x: float
    y: float
    battery: float = 100.0
    max_speed: float = 5.0  # m/tick
    capabilities: set[str] = field(default_factory=lambda: {"camera"})
    mode: str = "search"
    home_x: float = 0.0
    home_y: float = 0.0
    altitude: float = 40.0
    landed: bool = False
    below_threshold: bool = False  # low_battery already signalled

    def position(self) -> tuple[float, float]:
        return (self.x, self.y)


@dataclass
class Victim:
    victim_id: str
    x: float
    y: float
    drift_x: float = 0.0  # m/tick
    drift_y: float = 0.0


@dataclass
class Region:
    region_id: str
    kind: str  # strainer | smoke | hotspot | search-area | low-accuracy
    shape: str  # circle | rect
    x: float = 0.0
    y: float = 0.0
    radius: float = 0.0
    width: float = 0.0
    height: float = 0.0

    def contains(self, px: float, py: float) -> bool:
        if self.shape == "circle":
            return math.hypot(px - self.x, py - self.y) <= self.radius
        return (
            self.x <= px <= self.x + self.width and self.y <= py <= self.y + self.height
        )


@dataclass
class SensorModel:
    """Parametric stand-in for onboard vision: confidence falls off with
    distance, geolocation error grows inside low-accuracy regions."""

    radius: float = 30.0
    base_confidence: float = 0.95
    distance_falloff: float = 0.3  # confidence lost at full sensor range
    noise_std: float = 0.0
    error_base: float = 2.0  # meters
    error_low_accuracy: float = 38.0  # extra meters inside a low-accuracy region
    false_positive_prob: float = 0.0
    altitude_penalty: float = 0.0  # confidence lost per meter above reference
    reference_altitude: float = 40.0


@dataclass
class DetectionHit:
    agent_id: str
    victim_id: str | None  # None for a false positive
    x: float
    y: float
    confidence: float
    position_error: float
    tick: int


@dataclass
class WorldState:
    width: float
    height: float
    tick: int = 0
    uavs: dict[str, UavPhysical] = field(default_factory=dict)
    victims: list[Victim] = field(default_factory=list)
    regions: list[Region] = field(default_factory=list)
    sensor: SensorModel = field(default_factory=SensorModel)
    rng: random.Random = field(default_factory=lambda: random.Random(0))
    battery_drain: float = 0.1  # percent/tick at rest
    move_drain: float = 0.1  # extra percent/tick while moving
    low_battery_threshold: float = DEFAULT_LOW_BATTERY_THRESHOLD

    def clamp(self, x: float, y: float) -> tuple[float, float]:
        return (min(max(x, 0.0), self.width), min(max(y, 0.0), self.height))

    def victim(self, victim_id: str) -> Victim | None:
        for v in self.victims:
            if v.victim_id == victim_id:
                return v
        return None

    def in_low_accuracy_region(self, x: float, y: float) -> bool:
        return any(r.kind == "low-accuracy" and r.contains(x, y) for r in self.regions)


def simulate_detection(uav: UavPhysical, world: WorldState) -> list[DetectionHit]:
    """Run one sensor sweep for one UAV. Draws from the shared RNG in a
    fixed order per victim so replay stays exact."""
    if uav.landed or not ({"camera", "thermal"} & uav.capabilities):
        return []
    sm = world.sensor
    hits: list[DetectionHit] = []
    for v in world.victims:
        dist = math.hypot(uav.x - v.x, uav.y - v.y)
        if dist > sm.radius:
            continue
        noise = world.rng.gauss(0.0, sm.noise_std) if sm.noise_std > 0 else 0.0
        conf = (
            sm.base_confidence
            - sm.distance_falloff * dist / sm.radius
            - sm.altitude_penalty * max(0.0, uav.altitude - sm.reference_altitude)
            + noise
        )
        conf = min(max(conf, 0.0), 1.0)
        err = sm.error_base + (
            sm.error_low_accuracy if world.in_low_accuracy_region(v.x, v.y) else 0.0
        )
        hits.append(
            DetectionHit(
                agent_id=uav.agent_id,
                victim_id=v.victim_id,
                x=v.x,
                y=v.y,
                confidence=conf,
                position_error=err,
                tick=world.tick,
            )
        )
    if sm.false_positive_prob > 0 and world.rng.random() < sm.false_positive_prob:
        fx = world.rng.uniform(0, world.width)
        fy = world.rng.uniform(0, world.height)
        hits.append(
            DetectionHit(
                agent_id=uav.agent_id,
                victim_id=None,
                x=fx,
                y=fy,
                confidence=world.rng.uniform(0.3, 0.7),
                position_error=sm.error_base,
                tick=world.tick,
            )
        )
    return hits


def step_world(
    world: WorldState, actions: list[PrimitiveAction]
) -> tuple[list[dict[str, Any]], list[tuple[str, str]]]:
    """Advance kinematics, battery, and drift by one tick.

    Returns (action-executed payloads, signals) where each signal is
    (agent-id, signal-name). Unknown-agent actions are reported as
    errors in the payload list, never raised.
    """
    payloads: list[dict[str, Any]] = []
    signals: list[tuple[str, str]] = []
    moved: set[str] = set()

    for act in actions:
        uav = world.uavs.get(act.agent)
        if uav is None:
            payloads.append(
                {"error": f"action for unknown agent {act.agent!r}", "verb": act.verb}
            )
            continue
        if act.verb in ("move", "rtl"):
            tx, ty = world.clamp(float(act.args["x"]), float(act.args["y"]))
            dx, dy = tx - uav.x, ty - uav.y
            dist = math.hypot(dx, dy)
            if dist > 1e-9:
                step = min(uav.max_speed, dist)
                uav.x += dx / dist * step
                uav.y += dy / dist * step
                moved.add(uav.agent_id)
            if dist <= uav.max_speed + 1e-9:
                uav.x, uav.y = tx, ty
            if act.verb == "rtl":
                uav.mode = "rtl"
            payloads.append(
                {
                    "executor": act.agent,
                    "verb": act.verb,
                    "args": act.args,
                    "x": uav.x,
                    "y": uav.y,
                }
            )
        elif act.verb == "land":
            uav.landed = True
            payloads.append({"executor": act.agent, "verb": "land", "args": {}, "x": uav.x, "y": uav.y})
        elif act.verb == "set-mode":
            uav.mode = str(act.args["mode"])
            payloads.append({"executor": act.agent, "verb": "set-mode", "args": act.args})
        elif act.verb in ("broadcast", "deliver", "capture"):
            payloads.append({"executor": act.agent, "verb": act.verb, "args": act.args})
        else:
            payloads.append({"error": f"unknown verb {act.verb!r}", "verb": act.verb})

    # Battery drain and threshold crossing, agents ascending.
    for aid in sorted(world.uavs):
        uav = world.uavs[aid]
        if uav.landed:
            continue
        drain = world.battery_drain + (world.move_drain if aid in moved else 0.0)
        uav.battery = max(0.0, round(uav.battery - drain, 6))
        if uav.battery < world.low_battery_threshold and not uav.below_threshold:
            uav.below_threshold = True
            signals.append((aid, "low_battery"))
        elif uav.battery >= world.low_battery_threshold and uav.below_threshold:
            uav.below_threshold = False  # scripted recharge re-arms the signal

    for v in world.victims:
        if v.drift_x or v.drift_y:
            v.x, v.y = world.clamp(v.x + v.drift_x, v.y + v.drift_y)

    world.tick += 1
    return payloads, signals
