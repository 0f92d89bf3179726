// Payload shapes of the courseforge gateway. The console displays these
// verbatim; it never derives domain values client-side.

export interface CourseSpec {
  course_title: string;
  level: string;
  topic_hint: string | null;
  mode: string;
}

export interface FeedbackNote {
  target_subtask: string;
  suggestion: string;
  author: string;
  applied_in_rerun: boolean;
}

export interface RunSummary {
  run_id: string;
  mode: string;
  course: CourseSpec;
  completed: string[];
  next_subtask: string | null;
  pending_pause: PausePoint | null;
  stale: string[];
  closed: boolean;
  slide_budget: number;
  feedback_log: FeedbackNote[];
  error: string | null;
  busy: boolean;
}

export interface PausePoint {
  subtask: string;
  artifacts_preview: Record<string, string>;
  issued_at: string;
  pause_id: string;
}

export interface ProgressEvent {
  sequence: number;
  run_id: string;
  kind:
    | "subtask_started"
    | "subtask_completed"
    | "pause_issued"
    | "decision_applied"
    | "compile_attempt"
    | "run_finished"
    | "error";
  at: string;
  payload: Record<string, unknown>;
}

export type DecisionAction = "approve" | "modify" | "guide";

export interface DecisionOutcome {
  ok: boolean;
  status?: "applied" | "duplicate";
  reason?: "already_decided" | "no_pause";
  decisionId: string;
}

export type CatalogDocument = Record<string, unknown>;

export interface RunReport {
  run_id: string;
  token_total: number;
  token_total_millions: number;
  inference_hours: number;
  human_minutes_min: number;
  human_minutes_max: number;
  cost_usd: string;
  per_subtask: Record<string, unknown>;
}
