/**
 * Event-fold state store. The console holds no mission truth of its
 * own: every rendered value derives from folding the event stream,
 * using the same rules the engine's replay fold applies, so a client
 * that joined mid-run ends up deep-equal to a state snapshot.
 */

import type { MissionEvent } from "./events.js";

export interface BeliefEntry {
  value: { kind: string; value: unknown };
  level: 1 | 2 | 3;
  source: { kind: string; origin: string };
  version: number;
}

export interface GoalEntry {
  name: string;
  state: string;
}

export interface UavEntry {
  x?: number;
  y?: number;
  landed?: boolean;
  mode?: string;
}

export interface FoldState {
  tick: number;
  seq: number;
  status: string;
  beliefs: Record<string, Record<string, BeliefEntry>>;
  goals: Record<string, Record<string, GoalEntry>>;
  uavs: Record<string, UavEntry>;
  requests: Record<string, Record<string, unknown>>;
  permissions: Record<string, unknown>;
  decisions: Record<string, Record<string, unknown>>;
}

export function emptyFoldState(): FoldState {
  return {
    tick: 0,
    seq: 0,
    status: "running",
    beliefs: {},
    goals: {},
    uavs: {},
    requests: {},
    permissions: {},
    decisions: {},
  };
}

export function foldEvent(state: FoldState, ev: MissionEvent): FoldState {
  state.seq = ev.seq;
  state.tick = Math.max(state.tick, ev.tick);
  const p = ev.payload as Record<string, any>;
  const agent = ev.agent ?? "";
  switch (ev.kind) {
    case "belief-changed": {
      const entries = (state.beliefs[agent] ??= {});
      entries[p.key] = {
        value: p.value,
        level: p.level,
        source: p.source,
        version: p.version,
      };
      break;
    }
    case "goal-adopted": {
      const goals = (state.goals[agent] ??= {});
      goals[p.goal_id] = { name: p.name, state: "active" };
      break;
    }
    case "goal-dropped": {
      const goals = (state.goals[agent] ??= {});
      const entry = (goals[p.goal_id] ??= { name: p.name, state: "active" });
      entry.state = p.state ?? "aborted";
      break;
    }
    case "action-executed": {
      const executor = p.executor;
      if (executor != null) {
        const uav = (state.uavs[executor] ??= {});
        if ("x" in p) {
          uav.x = p.x;
          uav.y = p.y;
        }
        if (p.verb === "land") uav.landed = true;
        if (p.verb === "set-mode") uav.mode = p.args.mode;
        if (p.verb === "rtl") uav.mode = "rtl";
      }
      break;
    }
    case "permission-changed":
      state.permissions[`${p.scope}:${p.key}`] = p.new;
      break;
    case "confirmation-opened":
      state.requests[p.request_id] = { ...p };
      break;
    case "confirmation-answered": {
      const req = state.requests[p.request_id];
      if (req !== undefined) {
        req.state = p.verdict === "expired" ? "expired" : "answered";
      }
      break;
    }
    case "decision-logged":
      state.decisions[p.decision_id] = { ...p };
      break;
  }
  return state;
}

export function foldLog(events: MissionEvent[]): FoldState {
  const state = emptyFoldState();
  for (const ev of events) foldEvent(state, ev);
  return state;
}
