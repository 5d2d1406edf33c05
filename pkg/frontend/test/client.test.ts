/** Stream resume semantics, driven through an in-memory socket. */

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { EventStream, MissionClient, type StreamSocket } from "../src/client.js";
import type { MissionEvent } from "../src/events.js";

const here = dirname(fileURLToPath(import.meta.url));

const LOG_LINES = readFileSync(
  join(here, "fixtures", "s3_confirmation.log.jsonl"),
  "utf-8",
)
  .trim()
  .split("\n");

class FakeSocket implements StreamSocket {
  onmessage: ((ev: { data: string }) => void) | null = null;
  onclose: (() => void) | null = null;
  closed = false;

  constructor(readonly url: string) {}

  close(): void {
    this.closed = true;
  }

  feed(line: string): void {
    this.onmessage?.({ data: line });
  }

  drop(): void {
    this.onclose?.();
  }
}

function harness(fromSeq = 1) {
  const client = new MissionClient("http://service.test");
  const sockets: FakeSocket[] = [];
  const received: MissionEvent[] = [];
  const closes: number[] = [];
  const stream = new EventStream(
    client,
    "m-1",
    {
      fromSeq,
      onEvent: (ev) => received.push(ev),
      onClose: (seq) => closes.push(seq),
    },
    (url) => {
      const s = new FakeSocket(url);
      sockets.push(s);
      return s;
    },
  );
  return { stream, sockets, received, closes };
}

function fromParam(url: string): number {
  return Number(new URL(url).searchParams.get("from"));
}

describe("EventStream", () => {
  it("requests history from the configured seq", () => {
    const { stream, sockets } = harness(5);
    stream.open();
    expect(fromParam(sockets[0]!.url)).toBe(5);
  });

  it("applies events in order and tracks the last seq", () => {
    const { stream, sockets, received } = harness();
    stream.open();
    for (const line of LOG_LINES.slice(0, 10)) sockets[0]!.feed(line);
    expect(received.map((e) => e.seq)).toEqual([1, 2, 3, 4, 5, 6, 7, 8, 9, 10]);
    expect(stream.seq).toBe(10);
  });

  it("resumes after a drop with no gaps and no duplicates", () => {
    const { stream, sockets, received, closes } = harness();
    stream.open();
    for (const line of LOG_LINES.slice(0, 7)) sockets[0]!.feed(line);
    sockets[0]!.drop();
    expect(closes).toEqual([7]);

    stream.reopen();
    expect(fromParam(sockets[1]!.url)).toBe(8);
    // a sloppy server may resend an already-seen event; it is skipped
    for (const line of LOG_LINES.slice(6)) sockets[1]!.feed(line);
    expect(received.map((e) => e.seq)).toEqual(
      LOG_LINES.map((_, i) => i + 1),
    );
  });

  it("raises on a genuine gap", () => {
    const { stream, sockets } = harness();
    stream.open();
    sockets[0]!.feed(LOG_LINES[0]!);
    expect(() => sockets[0]!.feed(LOG_LINES[4]!)).toThrow(/gap/);
  });

  it("does not report a close after an explicit stop", () => {
    const { stream, sockets, closes } = harness();
    stream.open();
    stream.close();
    expect(sockets[0]!.closed).toBe(true);
    sockets[0]!.drop();
    expect(closes).toEqual([]);
  });
});
