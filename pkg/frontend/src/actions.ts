/**
 * Builders translating operator UI gestures into the interaction JSON
 * the service accepts, plus the optimistic pending-marker bookkeeping
 * that reconciles against interaction-received acks.
 */

import { InteractionSchema, type HumanInteraction, type MissionEvent } from "./events.js";

export type CommandKind =
  | "replace"
  | "goto"
  | "rtl"
  | "stop-tracking"
  | "deliver"
  | "set-role";

export function confirmRequest(issuer: string, requestId: string): HumanInteraction {
  return InteractionSchema.parse({
    kind: "feedback-response",
    issuer,
    request_id: requestId,
    verdict: "confirm",
  });
}

export function refuteRequest(
  issuer: string,
  requestId: string,
  note = "",
): HumanInteraction {
  return InteractionSchema.parse({
    kind: "feedback-response",
    issuer,
    request_id: requestId,
    verdict: "refute",
    note,
  });
}

export function amendRequest(
  issuer: string,
  requestId: string,
  amendments: Record<string, unknown>,
): HumanInteraction {
  return InteractionSchema.parse({
    kind: "feedback-response",
    issuer,
    request_id: requestId,
    verdict: "amend",
    amendments,
  });
}

export function setPermission(
  issuer: string,
  tick: number,
  key: string,
  granted: boolean,
  scope: { kind: "agent" | "role" | "mission"; id?: string },
  constraint?: number,
): HumanInteraction {
  return InteractionSchema.parse({
    kind: "changed-permission",
    issuer,
    change: {
      key,
      granted,
      scope_kind: scope.kind,
      ...(scope.id !== undefined ? { scope_id: scope.id } : {}),
      ...(constraint !== undefined ? { constraint } : {}),
      issuer,
      tick,
    },
  });
}

export function issueCommand(
  issuer: string,
  target: string,
  kind: CommandKind,
  args: Record<string, unknown> = {},
): HumanInteraction {
  return InteractionSchema.parse({
    kind: "issued-command",
    issuer,
    target,
    command: { kind, ...args },
  });
}

export function provideBelief(
  issuer: string,
  tick: number,
  key: string,
  level: 1 | 2 | 3,
  value: { kind: string; value: unknown },
): HumanInteraction {
  return InteractionSchema.parse({
    kind: "provided-information",
    issuer,
    belief: {
      key,
      level,
      value,
      source: { kind: "human", origin: issuer },
      tick,
    },
  });
}

export interface PendingMarker {
  seq: number;
  interaction: HumanInteraction;
  state: "pending" | "applied" | "error";
}

/** Tracks submitted interactions until their ack events stream back. */
export class PendingTracker {
  private markers = new Map<number, PendingMarker>();

  submitted(seq: number, interaction: HumanInteraction): PendingMarker {
    const marker: PendingMarker = { seq, interaction, state: "pending" };
    this.markers.set(seq, marker);
    return marker;
  }

  /** Feed every streamed event; resolves markers whose ack arrived. */
  observe(ev: MissionEvent): void {
    if (ev.kind === "interaction-received") {
      const marker = this.markers.get(ev.seq);
      if (marker !== undefined) marker.state = "applied";
    }
    if (ev.kind === "error") {
      const p = ev.payload as Record<string, any>;
      const marker = p.seq !== undefined ? this.markers.get(p.seq) : undefined;
      if (marker !== undefined) marker.state = "error";
    }
  }

  pending(): PendingMarker[] {
    return [...this.markers.values()].filter((m) => m.state === "pending");
  }
}
