/**
 * Wire types for the review service JSON API.
 *
 * These mirror the service payloads field for field; the UI never invents
 * fields of its own on top of them.
 */

/** One row from GET /api/sessions. */
export interface SessionRow {
    session: string;
    subject_id: string;
    assignment_id: string;
    file_path: string;
    event_count: number;
    span_ms: number;
}

/** One snapshot marker inside a snapshot sequence. */
export interface SnapshotMarker {
    step_index: number;
    reason: string;
    event_index: number;
    ts_ms: number;
    following_gap_ms: number | null;
    text: string;
}

/** GET /api/sessions/{key}/snapshots. */
export interface SnapshotSequenceDto {
    session: string;
    subject_id: string;
    assignment_id: string;
    file_path: string;
    threshold_ms: number;
    step_count: number;
    snapshots: SnapshotMarker[];
}

/** GET /api/sessions/{key}/state?at=N. */
export interface SessionStateDto {
    session: string;
    event_index: number;
    ts_ms: number;
    text: string;
}

export type GenerationStatusValue = "ok" | "error";

/** One stored generation, from GET /api/records or POST /api/generate. */
export interface GenerationRecordDto {
    record_id: string;
    subject_id: string;
    assignment_id: string;
    file_path: string;
    task: string;
    model_id: string;
    prompt_hash: string;
    response_text: string;
    latency_ms: number | null;
    response_chars: number;
    created_ts: string;
    status: GenerationStatusValue;
    error_detail: string | null;
    attempts: number;
    step_count: number;
}

/** Request body for POST /api/generate. */
export interface GenerateRequestBody {
    session: string;
    task: string;
    model: string;
    step_from?: number | null;
    step_to?: number | null;
}

/** Numeric rubric scores; likert fields run 1..5, hallucinations 0+. */
export interface RubricDto {
    hallucination_count: number;
    process_focus: number;
    specificity: number;
    correctness: number;
    utility: number;
}

/** Request body for POST /api/evaluations. */
export interface EvaluationRequestBody {
    record_id: string;
    rater_id: string;
    acceptable: boolean;
    reject_reason?: string | null;
    rubric?: RubricDto | null;
    themes?: string[];
    notes?: string;
}

/** Stored rating returned by POST /api/evaluations. */
export interface EvaluationRecordDto {
    record_id: string;
    rater_id: string;
    acceptable: boolean;
    reject_reason: string | null;
    rubric: RubricDto | null;
    themes: string[];
    notes: string;
    created_ts: string;
}

/** Task names the generate endpoint accepts. */
export const TASKS = ["summary", "feedback"] as const;

/** Reject reasons the evaluations endpoint accepts. */
export const REJECT_REASONS = ["single_state_only", "generic_only", "other"] as const;

/** Theme tags from the default codebook, in codebook order. */
export const THEME_TAGS = [
    "incremental_testing",
    "planning_ahead",
    "reduce_noise",
    "remove_dead_code",
    "add_comments",
    "decompose_functions",
    "naming",
] as const;
