/**
 * Pure projections from the fold state to what the screen shows: the
 * map layer, the belief inspector grouped by awareness level, the
 * pending-confirmations queue, the permission panel, and the decision
 * timeline. No projection mutates the store.
 */

import type { FoldState, BeliefEntry } from "./store.js";

export interface MapMarker {
  id: string;
  kind: "uav" | "victim" | "region";
  x: number;
  y: number;
  label: string;
}

export function mapLayer(state: FoldState): MapMarker[] {
  const markers: MapMarker[] = [];
  for (const [id, uav] of Object.entries(state.uavs).sort()) {
    if (uav.x === undefined || uav.y === undefined) continue;
    const mode = uav.mode ?? (uav.landed ? "landed" : "airborne");
    markers.push({ id, kind: "uav", x: uav.x, y: uav.y, label: `${id} (${mode})` });
  }
  const seen = new Set<string>();
  for (const entries of Object.values(state.beliefs)) {
    for (const [key, belief] of Object.entries(entries)) {
      const m = /^victim\.([^.]+)\.position$/.exec(key);
      if (m === null || seen.has(m[1]!)) continue;
      seen.add(m[1]!);
      const pos = belief.value.value as { x: number; y: number };
      markers.push({ id: m[1]!, kind: "victim", x: pos.x, y: pos.y, label: m[1]! });
    }
  }
  return markers;
}

export type BeliefInspector = Record<
  string,
  { level1: Record<string, BeliefEntry>; level2: Record<string, BeliefEntry>; level3: Record<string, BeliefEntry> }
>;

/** Per-agent beliefs bucketed by awareness level 1/2/3; exactly the
 * fold's keys, nothing synthesized. */
export function beliefInspector(state: FoldState): BeliefInspector {
  const out: BeliefInspector = {};
  for (const [agent, entries] of Object.entries(state.beliefs)) {
    const grouped = { level1: {}, level2: {}, level3: {} } as BeliefInspector[string];
    for (const [key, belief] of Object.entries(entries)) {
      grouped[`level${belief.level}`][key] = belief;
    }
    out[agent] = grouped;
  }
  return out;
}

export interface PendingConfirmation {
  requestId: string;
  agent: string;
  subject: Record<string, unknown>;
  openedTick: number;
}

export function pendingConfirmations(state: FoldState): PendingConfirmation[] {
  return Object.values(state.requests)
    .filter((r) => (r.state ?? "open") === "open")
    .map((r) => ({
      requestId: r.request_id as string,
      agent: (r.agent_id as string) ?? "",
      subject: (r.subject as Record<string, unknown>) ?? {},
      openedTick: (r.opened_tick as number) ?? 0,
    }))
    .sort((a, b) => a.requestId.localeCompare(b.requestId));
}

export interface PermissionRow {
  scope: string;
  key: string;
  granted: boolean;
  constraint: number | null;
}

export function permissionPanel(state: FoldState): PermissionRow[] {
  return Object.entries(state.permissions)
    .map(([scopedKey, value]) => {
      const idx = scopedKey.lastIndexOf(":");
      const v = value as { granted?: boolean; constraint?: number | null };
      return {
        scope: scopedKey.slice(0, idx),
        key: scopedKey.slice(idx + 1),
        granted: typeof value === "boolean" ? value : (v.granted ?? false),
        constraint: typeof value === "object" && value !== null ? (v.constraint ?? null) : null,
      };
    })
    .sort((a, b) => `${a.scope}:${a.key}`.localeCompare(`${b.scope}:${b.key}`));
}

export interface TimelineEntry {
  decisionId: string;
  tick: number;
  kind: string;
  chosen: unknown;
  rationale: string;
  expanded: Record<string, unknown>;
}

export function decisionTimeline(state: FoldState): TimelineEntry[] {
  return Object.values(state.decisions)
    .map((d) => ({
      decisionId: d.decision_id as string,
      tick: (d.tick as number) ?? 0,
      kind: d.decision_kind as string,
      chosen: d.chosen,
      rationale: (d.rationale as string) ?? "",
      expanded: d,
    }))
    .sort(
      (a, b) =>
        Number(a.decisionId.slice(2)) - Number(b.decisionId.slice(2)),
    );
}
