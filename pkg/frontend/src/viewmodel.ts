// Console state machine: everything displayed is fetched from the
// gateway, never derived locally. The decision form is enabled exactly
// while a pause is pending; the catalog editor is writable exactly then
// too. Decision posts carry a client decision id, so a retry of the
// same submission is idempotent while a second operator gets the
// "already decided" notice.

import { GatewayClient } from "./api.js";
import { EventFeed } from "./events.js";
import type {
  CatalogDocument,
  DecisionAction,
  DecisionOutcome,
  PausePoint,
  ProgressEvent,
  RunSummary,
} from "./types.js";

export type Listener = () => void;

export class ConsoleViewModel {
  runs: RunSummary[] = [];
  run: RunSummary | null = null;
  pause: PausePoint | null = null;
  catalog: CatalogDocument | null = null;
  notice = "";
  feed: EventFeed | null = null;
  private listeners = new Set<Listener>();
  private decisionInFlight = false;
  private feedTask: Promise<void> | null = null;

  constructor(private readonly client: GatewayClient) {}

  subscribe(listener: Listener): () => void {
    this.listeners.add(listener);
    return () => this.listeners.delete(listener);
  }

  private notify(): void {
    for (const listener of this.listeners) listener();
  }

  get events(): ProgressEvent[] {
    return this.feed ? this.feed.events : [];
  }

  canDecide(): boolean {
    return this.pause !== null && !this.decisionInFlight;
  }

  canEditCatalog(): boolean {
    return this.pause !== null;
  }

  async refreshRuns(): Promise<void> {
    this.runs = await this.client.listRuns();
    this.notify();
  }

  async openRun(runId: string): Promise<void> {
    this.closeRun();
    this.run = await this.client.getRun(runId);
    this.pause = this.run.pending_pause;
    this.catalog = await this.client.getCatalog(runId);
    this.feed = new EventFeed(this.client.baseUrl, runId, this.client.headers());
    this.feedTask = this.feed.start((event) => this.onEvent(event));
    this.notify();
  }

  closeRun(): void {
    this.feed?.stop();
    this.feed = null;
    this.feedTask = null;
    this.run = null;
    this.pause = null;
    this.catalog = null;
    this.notice = "";
  }

  private onEvent(event: ProgressEvent): void {
    void this.reactTo(event);
  }

  private async reactTo(event: ProgressEvent): Promise<void> {
    if (!this.run) return;
    const runId = this.run.run_id;
    if (event.kind === "pause_issued") {
      this.pause = await this.client.getPause(runId);
      this.notice = "";
    } else if (event.kind === "decision_applied") {
      this.pause = await this.client.getPause(runId);
      this.run = await this.client.getRun(runId);
    } else if (event.kind === "subtask_completed" || event.kind === "run_finished") {
      this.run = await this.client.getRun(runId);
      if (event.kind === "run_finished") this.pause = null;
    }
    this.notify();
  }

  async refreshPause(): Promise<void> {
    if (!this.run) return;
    this.pause = await this.client.getPause(this.run.run_id);
    this.notify();
  }

  async decide(action: DecisionAction, text = ""): Promise<DecisionOutcome> {
    if (!this.run || !this.pause) {
      throw new Error("no pending pause to decide");
    }
    this.decisionInFlight = true;
    this.notify();
    try {
      const outcome = await this.client.submitDecision(this.run.run_id, action, text);
      if (!outcome.ok) {
        this.notice =
          outcome.reason === "already_decided"
            ? "Another session already decided this pause; refreshing."
            : "No pause is pending anymore; refreshing.";
        await this.refreshPause();
      } else {
        this.notice = "";
      }
      return outcome;
    } finally {
      this.decisionInFlight = false;
      this.notify();
    }
  }

  approve(): Promise<DecisionOutcome> {
    return this.decide("approve");
  }

  modify(text: string): Promise<DecisionOutcome> {
    return this.decide("modify", text);
  }

  guide(text: string): Promise<DecisionOutcome> {
    return this.decide("guide", text);
  }

  async saveCatalog(document: CatalogDocument): Promise<void> {
    if (!this.run) throw new Error("no run open");
    if (!this.canEditCatalog()) {
      throw new Error("catalog is editable only while the run is paused");
    }
    this.catalog = await this.client.putCatalog(this.run.run_id, document);
    this.notify();
  }

  async sendFeedback(subtask: string, suggestion: string): Promise<void> {
    if (!this.run) throw new Error("no run open");
    await this.client.submitFeedback(this.run.run_id, subtask, suggestion);
    this.run = await this.client.getRun(this.run.run_id);
    this.notify();
  }

  async fetchArtifact(kind: string): Promise<unknown> {
    if (!this.run) throw new Error("no run open");
    return this.client.getArtifact(this.run.run_id, kind);
  }

  /** Wait until the feed settles (tests and shutdown hooks). */
  async drain(): Promise<void> {
    this.feed?.stop();
    await this.feedTask?.catch(() => undefined);
  }
}
