// Thin fetch client for the courseforge gateway. All errors surface as
// GatewayError with the problem document's title/detail; decision posts
// map the 409 outcomes to typed results instead of throwing, since
// "already decided" is a normal concurrent-operator outcome.

import type {
  CatalogDocument,
  DecisionAction,
  DecisionOutcome,
  PausePoint,
  ProgressEvent,
  RunReport,
  RunSummary,
} from "./types.js";

export class GatewayError extends Error {
  constructor(
    public status: number,
    public title: string,
    public detail: string,
  ) {
    super(`${status} ${title}: ${detail}`);
  }
}

interface ProblemDocument {
  title?: string;
  detail?: string;
  status?: number;
}

function newDecisionId(): string {
  const bytes = new Uint8Array(16);
  crypto.getRandomValues(bytes);
  return Array.from(bytes, (b) => b.toString(16).padStart(2, "0")).join("");
}

export class GatewayClient {
  constructor(
    public readonly baseUrl: string,
    private readonly token?: string,
  ) {}

  headers(): Record<string, string> {
    const headers: Record<string, string> = { "Content-Type": "application/json" };
    if (this.token) headers["Authorization"] = `Bearer ${this.token}`;
    return headers;
  }

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await fetch(`${this.baseUrl}${path}`, {
      method,
      headers: this.headers(),
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    if (!response.ok) {
      const problem = (await response.json().catch(() => ({}))) as ProblemDocument;
      throw new GatewayError(
        response.status,
        problem.title ?? response.statusText,
        problem.detail ?? "",
      );
    }
    return (await response.json()) as T;
  }

  async createRun(
    course: Record<string, unknown>,
    catalog?: CatalogDocument,
  ): Promise<string> {
    const body = catalog ? { course, catalog } : { course };
    const created = await this.request<{ run_id: string }>("POST", "/runs", body);
    return created.run_id;
  }

  async listRuns(): Promise<RunSummary[]> {
    const data = await this.request<{ runs: RunSummary[] }>("GET", "/runs");
    return data.runs;
  }

  getRun(runId: string): Promise<RunSummary> {
    return this.request<RunSummary>("GET", `/runs/${runId}`);
  }

  async getPause(runId: string): Promise<PausePoint | null> {
    try {
      return await this.request<PausePoint>("GET", `/runs/${runId}/pause`);
    } catch (error) {
      if (error instanceof GatewayError && error.status === 404) return null;
      throw error;
    }
  }

  async submitDecision(
    runId: string,
    action: DecisionAction,
    text = "",
    decisionId?: string,
  ): Promise<DecisionOutcome> {
    const decision_id = decisionId ?? newDecisionId();
    try {
      const result = await this.request<{ status: "applied" | "duplicate" }>(
        "POST",
        `/runs/${runId}/decision`,
        { action, text, decision_id },
      );
      return { ok: true, status: result.status, decisionId: decision_id };
    } catch (error) {
      if (error instanceof GatewayError && error.status === 409) {
        const reason = error.title === "already decided" ? "already_decided" : "no_pause";
        return { ok: false, reason, decisionId: decision_id };
      }
      throw error;
    }
  }

  submitFeedback(runId: string, subtask: string, suggestion: string): Promise<unknown> {
    return this.request("POST", `/runs/${runId}/feedback`, { subtask, suggestion });
  }

  getArtifact(runId: string, kind: string): Promise<unknown> {
    return this.request("GET", `/runs/${runId}/artifacts/${kind}`);
  }

  getTranscript(runId: string, subtask: string): Promise<{ items: unknown[] }> {
    return this.request("GET", `/runs/${runId}/transcripts/${subtask}`);
  }

  getCatalog(runId: string): Promise<CatalogDocument> {
    return this.request("GET", `/runs/${runId}/catalog`);
  }

  putCatalog(runId: string, catalog: CatalogDocument): Promise<CatalogDocument> {
    return this.request("PUT", `/runs/${runId}/catalog`, catalog);
  }

  getReport(runId: string): Promise<RunReport> {
    return this.request("GET", `/runs/${runId}/report`);
  }

  async readEvents(runId: string, after: number): Promise<ProgressEvent[]> {
    const response = await fetch(
      `${this.baseUrl}/runs/${runId}/events?after=${after}`,
      { headers: this.headers() },
    );
    if (!response.ok || !response.body) {
      throw new GatewayError(response.status, "event stream failed", "");
    }
    const text = await response.text();
    return text
      .split("\n")
      .filter((line) => line.trim())
      .map((line) => JSON.parse(line) as ProgressEvent);
  }

  pdfUrl(runId: string, pdfPath: string): string {
    // compiled decks are linked, never embedded
    return `${this.baseUrl}/runs/${runId}/artifacts/decks#${pdfPath}`;
  }
}
