/**
 * Client-side validation for the rating form.
 *
 * The rules mirror what the evaluations endpoint enforces, so anything that
 * passes here is expected to be accepted server-side: likert scores are
 * integers 1..5, hallucination count is a non-negative integer, a rejection
 * carries a reason, and the rubric is either complete or absent.
 */

import type { EvaluationRequestBody, RubricDto } from "./types.js";

export const LIKERT_FIELDS = [
    "process_focus",
    "specificity",
    "correctness",
    "utility",
] as const;

export type LikertField = (typeof LIKERT_FIELDS)[number];

/** Raw form state, all score inputs still as strings. */
export interface RubricFormValues {
    recordId: string;
    raterId: string;
    acceptable: boolean;
    rejectReason: string;
    hallucinationCount: string;
    scores: Record<LikertField, string>;
    themes: string[];
    notes: string;
}

export interface FieldError {
    field: string;
    message: string;
}

export type ValidationResult =
    | { ok: true; body: EvaluationRequestBody }
    | { ok: false; errors: FieldError[] };

function parseIntStrict(raw: string): number | null {
    if (!/^-?\d+$/.test(raw.trim())) {
        return null;
    }
    return parseInt(raw.trim(), 10);
}

/** Check form values and build the request body when they pass. */
export function validateRubricForm(values: RubricFormValues): ValidationResult {
    const errors: FieldError[] = [];

    if (values.recordId.trim() === "") {
        errors.push({ field: "record_id", message: "pick a record to rate" });
    }
    if (values.raterId.trim() === "") {
        errors.push({ field: "rater_id", message: "rater id must not be empty" });
    }
    if (!values.acceptable && values.rejectReason.trim() === "") {
        errors.push({
            field: "reject_reason",
            message: "a rejected response needs a reason",
        });
    }

    const scoreRaw: Record<string, string> = {
        hallucination_count: values.hallucinationCount,
        ...values.scores,
    };
    const filled = Object.entries(scoreRaw).filter(([, raw]) => raw.trim() !== "");
    let rubric: RubricDto | null = null;

    if (filled.length > 0) {
        for (const [field, raw] of Object.entries(scoreRaw)) {
            if (raw.trim() === "") {
                errors.push({
                    field,
                    message: "fill every score or leave the whole rubric blank",
                });
                continue;
            }
            const value = parseIntStrict(raw);
            if (value === null) {
                errors.push({ field, message: "must be a whole number" });
            } else if (field === "hallucination_count" && value < 0) {
                errors.push({ field, message: "must be 0 or more" });
            } else if (field !== "hallucination_count" && (value < 1 || value > 5)) {
                errors.push({ field, message: "must be between 1 and 5" });
            }
        }
        if (errors.length === 0) {
            rubric = {
                hallucination_count: parseIntStrict(values.hallucinationCount)!,
                process_focus: parseIntStrict(values.scores.process_focus)!,
                specificity: parseIntStrict(values.scores.specificity)!,
                correctness: parseIntStrict(values.scores.correctness)!,
                utility: parseIntStrict(values.scores.utility)!,
            };
        }
    }

    if (errors.length > 0) {
        return { ok: false, errors };
    }

    return {
        ok: true,
        body: {
            record_id: values.recordId.trim(),
            rater_id: values.raterId.trim(),
            acceptable: values.acceptable,
            reject_reason: values.acceptable ? null : values.rejectReason.trim(),
            rubric,
            themes: values.themes.map((t) => t.trim()).filter((t) => t !== ""),
            notes: values.notes,
        },
    };
}
