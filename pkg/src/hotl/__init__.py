"""Deterministic human-on-the-loop multi-UAV mission engine.

BDI agents with three-level knowledge bases run simulated
emergency-response missions that operators steer at run-time through
information sharing, feedback, commands, and permission changes. Every
run is an event-sourced JSONL log that replays byte-for-byte.
"""

from .beliefs import Belief, BeliefValue, KnowledgeBase, Source
from .autonomy import Permission, PermissionChange, PermissionTable, Role
from .plans import BdiEvent, Condition, GoalInstance, Intention, PlanSpec, PlanStep, Trigger
from .plans import applicable_plans, select_plan
from .agent import AgentState, PrimitiveAction, adopt_goal, apply_feedback, drop_goal, reasoning_step
from .coordination import (
    Detection,
    DetectionGroup,
    RescueDecision,
    deduplicate_detections,
    plan_rescue,
    select_replacement,
)
from .interaction import ConfirmationRequest, HumanInteraction
from .world import WorldState, UavPhysical, simulate_detection, step_world
from .scenario import (
    SHIPPED_SCENARIOS,
    ScenarioSpec,
    load_scenario,
    load_shipped,
    load_transcript,
    shipped_scenario_path,
    shipped_transcript_path,
)
from .engine import Mission, run_headless, stream_events, extract_transcript
from .replay import fold_log, replay, verify
from .events import MissionEvent, canonical_json, read_log, write_log

__all__ = [
    "AgentState",
    "BdiEvent",
    "Belief",
    "BeliefValue",
    "Condition",
    "ConfirmationRequest",
    "Detection",
    "DetectionGroup",
    "GoalInstance",
    "HumanInteraction",
    "Intention",
    "KnowledgeBase",
    "Mission",
    "MissionEvent",
    "Permission",
    "PermissionChange",
    "PermissionTable",
    "PlanSpec",
    "PlanStep",
    "PrimitiveAction",
    "RescueDecision",
    "Role",
    "SHIPPED_SCENARIOS",
    "ScenarioSpec",
    "Source",
    "Trigger",
    "UavPhysical",
    "WorldState",
    "adopt_goal",
    "applicable_plans",
    "apply_feedback",
    "canonical_json",
    "deduplicate_detections",
    "drop_goal",
    "extract_transcript",
    "fold_log",
    "load_scenario",
    "load_shipped",
    "load_transcript",
    "shipped_scenario_path",
    "shipped_transcript_path",
    "plan_rescue",
    "read_log",
    "reasoning_step",
    "replay",
    "run_headless",
    "select_plan",
    "select_replacement",
    "simulate_detection",
    "step_world",
    "stream_events",
    "verify",
    "write_log",
]
