// Server-sent-events client built on fetch + ReadableStream so the same
// code runs in the browser and under node-based tests. Reconnects with
// backoff and drops events whose id was already seen, so a reconnect never
// duplicates a capture marker.

import type { StreamEvent } from "./types.js";

export interface StreamOptions {
  onEvent: (ev: StreamEvent) => void;
  onGap?: () => void; // called when a reconnect happens (chart draws a gap marker)
  onStatusChange?: (connected: boolean) => void;
  baseBackoffMs?: number;
  maxBackoffMs?: number;
}

export function parseSseChunk(buffer: string): { events: StreamEvent[]; rest: string } {
  const events: StreamEvent[] = [];
  const blocks = buffer.split("\n\n");
  const rest = blocks.pop() ?? "";
  for (const block of blocks) {
    let id: number | null = null;
    let eventName = "message";
    const dataLines: string[] = [];
    for (const line of block.split("\n")) {
      if (line.startsWith(":")) continue; // comment / keepalive
      if (line.startsWith("id:")) id = Number(line.slice(3).trim());
      else if (line.startsWith("event:")) eventName = line.slice(6).trim();
      else if (line.startsWith("data:")) dataLines.push(line.slice(5).trim());
    }
    if (dataLines.length === 0) continue;
    let data: Record<string, any>;
    try {
      data = JSON.parse(dataLines.join("\n"));
    } catch {
      continue; // malformed frame; skip rather than kill the stream
    }
    events.push({ id, event: eventName, data });
  }
  return { events, rest };
}

export class EventStreamClient {
  private seen = new Set<number>();
  private closed = false;
  private attempt = 0;
  private controller: AbortController | null = null;

  constructor(
    private url: string,
    private opts: StreamOptions,
  ) {}

  start(): void {
    this.closed = false;
    void this.loop();
  }

  close(): void {
    this.closed = true;
    this.controller?.abort();
  }

  private async loop(): Promise<void> {
    while (!this.closed) {
      try {
        await this.consumeOnce();
      } catch {
        /* fall through to backoff */
      }
      if (this.closed) break;
      this.opts.onStatusChange?.(false);
      this.opts.onGap?.();
      const base = this.opts.baseBackoffMs ?? 500;
      const cap = this.opts.maxBackoffMs ?? 8000;
      const wait = Math.min(cap, base * 2 ** this.attempt);
      this.attempt += 1;
      await new Promise((resolve) => setTimeout(resolve, wait));
    }
  }

  private async consumeOnce(): Promise<void> {
    this.controller = new AbortController();
    const res = await fetch(this.url, {
      headers: { Accept: "text/event-stream" },
      signal: this.controller.signal,
    });
    if (!res.ok || !res.body) throw new Error(`stream failed: ${res.status}`);
    this.attempt = 0;
    this.opts.onStatusChange?.(true);
    const reader = res.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    while (!this.closed) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      const { events, rest } = parseSseChunk(buffer);
      buffer = rest;
      for (const ev of events) this.deliver(ev);
    }
  }

  private deliver(ev: StreamEvent): void {
    if (ev.id !== null) {
      if (this.seen.has(ev.id)) return;
      this.seen.add(ev.id);
    }
    this.opts.onEvent(ev);
  }
}
