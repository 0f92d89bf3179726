// Live event feed over the gateway's resumable NDJSON stream.
//
// The reader keeps the last seen sequence number; every (re)connection
// asks for `?after=<last>`, so a dropped stream resumes without gaps.
// Ordering is enforced on arrival: a sequence at or below the cursor is
// discarded as a replay, a jump past cursor+1 forces a reconnect from
// the cursor rather than surfacing a hole.

import type { ProgressEvent } from "./types.js";

export type EventHandler = (event: ProgressEvent) => void;

export class EventFeed {
  lastSequence = 0;
  readonly events: ProgressEvent[] = [];
  private controller: AbortController | null = null;
  private running = false;
  private finished = false;

  constructor(
    private readonly baseUrl: string,
    private readonly runId: string,
    private readonly headers: Record<string, string> = {},
    private readonly retryDelayMs = 250,
  ) {}

  get isFinished(): boolean {
    return this.finished;
  }

  async start(onEvent?: EventHandler): Promise<void> {
    this.running = true;
    while (this.running && !this.finished) {
      try {
        await this.consumeOnce(onEvent);
      } catch (error) {
        if (!this.running) return;
        await sleep(this.retryDelayMs);
        continue;
      }
      if (this.running && !this.finished) {
        // stream ended without run_finished (idle server); poll again
        await sleep(this.retryDelayMs);
      }
    }
  }

  stop(): void {
    this.running = false;
    this.controller?.abort();
  }

  /** Abort the in-flight connection but keep running (signal-loss drill). */
  dropConnection(): void {
    this.controller?.abort();
  }

  private async consumeOnce(onEvent?: EventHandler): Promise<void> {
    this.controller = new AbortController();
    const response = await fetch(
      `${this.baseUrl}/runs/${this.runId}/events?after=${this.lastSequence}`,
      { headers: this.headers, signal: this.controller.signal },
    );
    if (!response.ok || !response.body) {
      throw new Error(`event stream HTTP ${response.status}`);
    }
    const reader = response.body.getReader();
    const decoder = new TextDecoder();
    let buffer = "";
    for (;;) {
      const { done, value } = await reader.read();
      if (done) break;
      buffer += decoder.decode(value, { stream: true });
      let newline = buffer.indexOf("\n");
      while (newline >= 0) {
        const line = buffer.slice(0, newline).trim();
        buffer = buffer.slice(newline + 1);
        newline = buffer.indexOf("\n");
        if (!line) continue;
        const event = JSON.parse(line) as ProgressEvent;
        if (event.sequence <= this.lastSequence) continue;
        if (event.sequence !== this.lastSequence + 1) {
          // a hole: reconnect from the cursor instead of skipping
          this.controller.abort();
          return;
        }
        this.lastSequence = event.sequence;
        this.events.push(event);
        onEvent?.(event);
        if (event.kind === "run_finished") {
          this.finished = true;
          this.running = false;
          this.controller.abort();
          return;
        }
      }
    }
  }
}

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}
