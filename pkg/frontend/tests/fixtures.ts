/**
 * Shared fixtures shaped exactly like the service payloads.
 */

import type { GenerationRecordDto, SnapshotSequenceDto } from "../src/types.js";

/** Final text keeps a non-ASCII character and trailing newline on purpose. */
export const FINAL_TEXT = 'd = {}\nfor k in data:\n    d[k] = norm("résumé", k)\nprint(d)\n';

export const SEQUENCE: SnapshotSequenceDto = {
    session: "S1_fluky_main.py",
    subject_id: "S1",
    assignment_id: "fluky",
    file_path: "main.py",
    threshold_ms: 300000,
    step_count: 3,
    snapshots: [
        {
            step_index: 1,
            reason: "first",
            event_index: 1,
            ts_ms: 0,
            following_gap_ms: 412000,
            text: "d = {}\n",
        },
        {
            step_index: 2,
            reason: "pre_break",
            event_index: 9,
            ts_ms: 412000,
            following_gap_ms: 355000,
            text: "d = {}\nfor k in data:\n    d[k] = 0\n",
        },
        {
            step_index: 3,
            reason: "final",
            event_index: 17,
            ts_ms: 801000,
            following_gap_ms: null,
            text: FINAL_TEXT,
        },
    ],
};

export function makeRecord(
    overrides: Partial<GenerationRecordDto> = {},
): GenerationRecordDto {
    return {
        record_id: "S1_fluky_feedback_alpha-large",
        subject_id: "S1",
        assignment_id: "fluky",
        file_path: "main.py",
        task: "feedback",
        model_id: "alpha-large",
        prompt_hash: "0f3a",
        response_text: "In step 2 a loop appeared before any output was printed.",
        latency_ms: 1814,
        response_chars: 56,
        created_ts: "2026-08-17T10:00:00Z",
        status: "ok",
        error_detail: null,
        attempts: 1,
        step_count: 3,
        ...overrides,
    };
}
