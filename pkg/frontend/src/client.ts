/**
 * Service client: thin HTTP wrappers plus a resumable event stream.
 * The stream remembers the last applied seq, so a dropped connection
 * resumes from exactly the next event and the fold never sees a gap
 * or a duplicate.
 */

import { parseEventLine, type HumanInteraction, type MissionEvent } from "./events.js";

export interface MissionSummary {
  mission_id: string;
  status: string;
  scenario: string;
}

export class ServiceError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const resp = await fetch(url, init);
  const body = await resp.json();
  if (!resp.ok) {
    throw new ServiceError(resp.status, String(body.detail ?? resp.statusText));
  }
  return body as T;
}

export class MissionClient {
  constructor(readonly baseUrl: string) {}

  private url(path: string): string {
    return this.baseUrl.replace(/\/$/, "") + path;
  }

  createMission(body: Record<string, unknown>): Promise<MissionSummary> {
    return request(this.url("/missions"), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  submitInteraction(missionId: string, interaction: HumanInteraction): Promise<{ seq: number }> {
    return request(this.url(`/missions/${missionId}/interactions`), {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(interaction),
    });
  }

  getState(missionId: string): Promise<Record<string, unknown>> {
    return request(this.url(`/missions/${missionId}/state`));
  }

  getDecision(missionId: string, decisionId: string): Promise<Record<string, unknown>> {
    return request(this.url(`/missions/${missionId}/decisions/${decisionId}`));
  }

  pause(missionId: string): Promise<MissionSummary> {
    return request(this.url(`/missions/${missionId}/pause`), { method: "POST" });
  }

  resume(missionId: string): Promise<MissionSummary> {
    return request(this.url(`/missions/${missionId}/resume`), { method: "POST" });
  }

  streamUrl(missionId: string, fromSeq: number): string {
    const ws = this.baseUrl.replace(/^http/, "ws").replace(/\/$/, "");
    return `${ws}/missions/${missionId}/events?from=${fromSeq}`;
  }
}

/** The subset of the WebSocket surface the stream needs; injectable so
 * tests can drive it without a network. */
export interface StreamSocket {
  onmessage: ((ev: { data: string }) => void) | null;
  onclose: (() => void) | null;
  close(): void;
}

export type SocketFactory = (url: string) => StreamSocket;

export interface StreamOptions {
  onEvent: (ev: MissionEvent) => void;
  onClose?: (lastSeq: number) => void;
  fromSeq?: number;
}

export class EventStream {
  private lastSeq: number;
  private socket: StreamSocket | null = null;
  private stopped = false;

  constructor(
    private readonly client: MissionClient,
    private readonly missionId: string,
    private readonly options: StreamOptions,
    private readonly connect: SocketFactory,
  ) {
    this.lastSeq = (options.fromSeq ?? 1) - 1;
  }

  /** Opens (or re-opens) the stream from the first unseen seq. */
  open(): void {
    this.stopped = false;
    const socket = this.connect(this.client.streamUrl(this.missionId, this.lastSeq + 1));
    socket.onmessage = (msg) => {
      const ev = parseEventLine(msg.data);
      if (ev.seq <= this.lastSeq) return; // duplicate after reconnect
      if (ev.seq !== this.lastSeq + 1) {
        throw new Error(`event stream gap: expected ${this.lastSeq + 1}, got ${ev.seq}`);
      }
      this.lastSeq = ev.seq;
      this.options.onEvent(ev);
    };
    socket.onclose = () => {
      if (!this.stopped) this.options.onClose?.(this.lastSeq);
    };
    this.socket = socket;
  }

  /** Reconnect after a drop; resumes with no gaps and no duplicates. */
  reopen(): void {
    this.open();
  }

  close(): void {
    this.stopped = true;
    this.socket?.close();
  }

  get seq(): number {
    return this.lastSeq;
  }
}
