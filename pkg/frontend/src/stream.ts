// Live event feed transport: line-delimited JSON over a long-lived fetch.
// Heartbeat lines start with ":". On any drop the stream reconnects by
// itself, resuming from the last seq it saw, so no event is ever missed
// or duplicated across reconnects.

import type { FetchLike } from "./api.js";
import type { ConnectionState, EventRecord } from "./types.js";

export class NdjsonSplitter {
  private buffer = "";

  /** Feed a chunk of text; returns the complete lines it finished. */
  push(chunk: string): string[] {
    this.buffer += chunk;
    const lines = this.buffer.split("\n");
    this.buffer = lines.pop() ?? "";
    return lines.filter((line) => line.length > 0);
  }
}

export interface EventStreamOptions {
  base?: string;
  since?: number;
  fetchFn?: FetchLike;
  reconnectDelayMs?: number;
  onEvent: (record: EventRecord) => void;
  onState?: (state: ConnectionState) => void;
}

export class EventStream {
  lastSeq: number;
  private base: string;
  private fetchFn: FetchLike;
  private reconnectDelayMs: number;
  private onEvent: (record: EventRecord) => void;
  private onState: (state: ConnectionState) => void;
  private stopped = false;
  private controller: AbortController | null = null;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(options: EventStreamOptions) {
    this.base = options.base ?? "";
    this.lastSeq = options.since ?? 0;
    this.fetchFn = options.fetchFn ?? ((input, init) => fetch(input, init));
    this.reconnectDelayMs = options.reconnectDelayMs ?? 1000;
    this.onEvent = options.onEvent;
    this.onState = options.onState ?? (() => {});
  }

  start(): void {
    this.stopped = false;
    void this.connect();
  }

  stop(): void {
    this.stopped = true;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
    this.controller?.abort();
  }

  /** One line from the wire: heartbeat or an event record. */
  handleLine(line: string): void {
    if (line.startsWith(":")) {
      return; // heartbeat
    }
    let record: EventRecord;
    try {
      record = JSON.parse(line) as EventRecord;
    } catch {
      return; // tolerate garbage rather than killing the feed
    }
    if (typeof record.seq !== "number" || record.seq <= this.lastSeq) {
      return; // duplicate after a reconnect
    }
    this.lastSeq = record.seq;
    this.onEvent(record);
  }

  private async connect(): Promise<void> {
    if (this.stopped) {
      return;
    }
    this.onState("connecting");
    this.controller = new AbortController();
    try {
      const resp = await this.fetchFn(
        `${this.base}/v1/events/stream?since=${this.lastSeq}`,
        { signal: this.controller.signal } as RequestInit,
      );
      if (!resp.ok || resp.body === null) {
        throw new Error(`stream http ${resp.status}`);
      }
      this.onState("live");
      const reader = resp.body.getReader();
      const decoder = new TextDecoder();
      const splitter = new NdjsonSplitter();
      for (;;) {
        const { done, value } = await reader.read();
        if (done) {
          break;
        }
        for (const line of splitter.push(decoder.decode(value, { stream: true }))) {
          this.handleLine(line);
        }
      }
    } catch {
      /* fall through to reconnect */
    }
    if (!this.stopped) {
      this.onState("disconnected");
      this.timer = setTimeout(() => void this.connect(), this.reconnectDelayMs);
    }
  }
}
