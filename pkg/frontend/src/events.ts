/**
 * Wire types shared with the mission service. Event lines arriving over
 * the stream are validated before they touch the fold store.
 */

import { z } from "zod";

export const EVENT_KINDS = [
  "belief-changed",
  "goal-adopted",
  "goal-dropped",
  "plan-selected",
  "plan-failed",
  "permission-changed",
  "interaction-received",
  "confirmation-opened",
  "confirmation-answered",
  "decision-logged",
  "detection",
  "action-executed",
  "error",
] as const;

export type EventKind = (typeof EVENT_KINDS)[number];

export const MissionEventSchema = z.object({
  seq: z.number().int().positive(),
  tick: z.number().int().nonnegative(),
  kind: z.enum(EVENT_KINDS),
  payload: z.record(z.unknown()),
  agent: z.string().nullable().optional(),
});

export type MissionEvent = z.infer<typeof MissionEventSchema>;

export function parseEventLine(line: string): MissionEvent {
  return MissionEventSchema.parse(JSON.parse(line));
}

const BeliefValueSchema = z.object({
  kind: z.enum(["position", "scalar", "boolean", "text", "duration", "ident"]),
  value: z.unknown(),
});

const BeliefSchema = z.object({
  key: z.string().min(1),
  level: z.union([z.literal(1), z.literal(2), z.literal(3)]),
  value: BeliefValueSchema,
  source: z.object({ kind: z.enum(["sensor", "agent", "human"]), origin: z.string() }),
  tick: z.number().int().nonnegative(),
  version: z.number().int().nonnegative().optional(),
});

const PermissionChangeSchema = z.object({
  key: z.string().min(1),
  granted: z.boolean(),
  scope_kind: z.enum(["agent", "role", "mission"]),
  scope_id: z.string().optional(),
  constraint: z.number().nullable().optional(),
  issuer: z.string(),
  tick: z.number().int().nonnegative(),
});

const CommandSchema = z.object({
  kind: z.enum(["replace", "goto", "rtl", "stop-tracking", "deliver", "set-role"]),
}).passthrough();

/** One schema per interaction kind, discriminated the way the engine is. */
export const InteractionSchema = z.discriminatedUnion("kind", [
  z.object({
    kind: z.literal("provided-information"),
    issuer: z.string(),
    belief: BeliefSchema,
  }),
  z.object({
    kind: z.literal("issued-command"),
    issuer: z.string(),
    target: z.string(),
    command: CommandSchema,
  }),
  z.object({
    kind: z.literal("changed-permission"),
    issuer: z.string(),
    change: PermissionChangeSchema,
  }),
  z.object({
    kind: z.literal("feedback-response"),
    issuer: z.string(),
    request_id: z.string(),
    verdict: z.enum(["confirm", "refute", "amend"]),
    amendments: z.record(z.unknown()).optional(),
    note: z.string().optional(),
  }),
]);

export type HumanInteraction = z.infer<typeof InteractionSchema>;
