/**
 * DOM builders for the review screens.
 *
 * Everything goes through createElement and textContent so response text and
 * step text are always rendered verbatim, never parsed as markup.
 */

import { diffLines, hasChanges } from "./diff.js";
import type { DiffLine } from "./diff.js";
import { checkStepRefs } from "./refs.js";
import {
    LIKERT_FIELDS,
    validateRubricForm,
} from "./rubric.js";
import type { FieldError, RubricFormValues } from "./rubric.js";
import type { Timeline } from "./timeline.js";
import type {
    EvaluationRequestBody,
    GenerationRecordDto,
    SnapshotMarker,
} from "./types.js";
import { REJECT_REASONS, THEME_TAGS } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    className?: string,
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    if (className) {
        node.className = className;
    }
    if (text !== undefined) {
        node.textContent = text;
    }
    return node;
}

function pad3(n: number): string {
    return String(n).padStart(3, "0");
}

/* ------------------------------------------------------------------ */
/* Timeline                                                           */
/* ------------------------------------------------------------------ */

/**
 * Build the scrubber and one dot per snapshot marker. Dots and scrubber both
 * funnel into onSelect with the marker index; highlighting is handled by
 * highlightMarker so callers can re-sync after programmatic selection.
 */
export function renderTimeline(
    container: HTMLElement,
    timeline: Timeline,
    onSelect: (index: number) => void,
): void {
    container.textContent = "";

    const track = el("div", "timeline-track");
    const positions = timeline.positions();
    timeline.markers.forEach((marker, index) => {
        const dot = el("button", `marker marker-${marker.reason}`);
        dot.type = "button";
        dot.dataset.step = String(marker.step_index);
        dot.dataset.index = String(index);
        dot.style.left = `${(positions[index] * 100).toFixed(2)}%`;
        dot.title = `step ${pad3(marker.step_index)} (${marker.reason}) after event ${marker.event_index}`;
        dot.addEventListener("click", () => onSelect(index));
        track.appendChild(dot);
    });
    container.appendChild(track);

    const scrubber = el("input", "scrubber");
    scrubber.type = "range";
    scrubber.min = "0";
    scrubber.max = String(timeline.finalIndex);
    scrubber.step = "1";
    scrubber.value = String(timeline.selectedIndex);
    scrubber.addEventListener("input", () => {
        onSelect(parseInt(scrubber.value, 10));
    });
    container.appendChild(scrubber);
}

/** Sync dot highlight and scrubber position to the selected index. */
export function highlightMarker(container: HTMLElement, index: number): void {
    container.querySelectorAll<HTMLButtonElement>(".marker").forEach((dot) => {
        dot.classList.toggle("selected", dot.dataset.index === String(index));
    });
    const scrubber = container.querySelector<HTMLInputElement>(".scrubber");
    if (scrubber) {
        scrubber.value = String(index);
    }
}

/** Fill the step header and the verbatim step text panel. */
export function renderStepPanel(
    header: HTMLElement,
    textPane: HTMLElement,
    marker: SnapshotMarker,
): void {
    header.textContent =
        `Step ${pad3(marker.step_index)} · ${marker.reason} · ` +
        `after event ${marker.event_index} · t=${marker.ts_ms}ms`;
    textPane.textContent = marker.text;
}

/* ------------------------------------------------------------------ */
/* Diff                                                               */
/* ------------------------------------------------------------------ */

/** Render a line diff, or the explicit no-change indicator. */
export function renderDiffPanel(container: HTMLElement, lines: DiffLine[]): void {
    container.textContent = "";
    if (!hasChanges(lines)) {
        container.appendChild(
            el("div", "diff-empty", "no changes in this step"),
        );
        return;
    }
    const markers: Record<DiffLine["kind"], string> = {
        same: "  ",
        add: "+ ",
        del: "- ",
    };
    for (const line of lines) {
        container.appendChild(
            el("div", `diff-line diff-${line.kind}`, markers[line.kind] + line.line),
        );
    }
}

/** Diff the selected step against its predecessor and render it. */
export function renderStepDiff(container: HTMLElement, timeline: Timeline): void {
    renderDiffPanel(
        container,
        diffLines(timeline.previousText(), timeline.selectedMarker.text),
    );
}

/* ------------------------------------------------------------------ */
/* Generation records                                                 */
/* ------------------------------------------------------------------ */

/**
 * Card for one generation record. Step references are checked against the
 * step count the prompt was built from; any reference outside it gets the
 * invalid badge.
 */
export function renderRecordCard(record: GenerationRecordDto): HTMLElement {
    const card = el("article", "record-card");
    card.dataset.recordId = record.record_id;

    const head = el("header", "record-head");
    head.appendChild(el("span", "record-id", record.record_id));
    head.appendChild(el("span", "record-meta", `${record.task} · ${record.model_id}`));
    head.appendChild(
        el("span", `badge badge-status-${record.status}`, record.status),
    );
    card.appendChild(head);

    if (record.status !== "ok") {
        card.appendChild(
            el("div", "record-error", record.error_detail ?? "generation failed"),
        );
        return card;
    }

    const check = checkStepRefs(record.response_text, record.step_count);
    const refLine = el("div", "refs-line");
    if (check.referenced.length === 0) {
        refLine.appendChild(el("span", "refs-none", "cites no steps"));
    } else {
        const unique = [...new Set(check.referenced)];
        refLine.appendChild(
            el("span", "refs-cited", `cites steps: ${unique.join(", ")}`),
        );
    }
    if (check.invalid.length > 0) {
        const missing = [...new Set(check.invalid)];
        refLine.appendChild(
            el(
                "span",
                "badge badge-invalid",
                `cites missing steps: ${missing.join(", ")}`,
            ),
        );
    }
    card.appendChild(refLine);

    card.appendChild(el("pre", "response-text", record.response_text));
    return card;
}

/** Replace the record list with one card per record. */
export function renderRecordList(
    container: HTMLElement,
    records: GenerationRecordDto[],
    onPick?: (record: GenerationRecordDto) => void,
): void {
    container.textContent = "";
    if (records.length === 0) {
        container.appendChild(el("p", "records-empty", "no records yet"));
        return;
    }
    for (const record of records) {
        const card = renderRecordCard(record);
        if (onPick) {
            const pick = el("button", "pick-record", "rate this response");
            pick.type = "button";
            pick.addEventListener("click", () => onPick(record));
            card.appendChild(pick);
        }
        container.appendChild(card);
    }
}

/* ------------------------------------------------------------------ */
/* Rating form                                                        */
/* ------------------------------------------------------------------ */

const LIKERT_LABELS: Record<string, string> = {
    process_focus: "process focus",
    specificity: "specificity",
    correctness: "correctness",
    utility: "utility",
};

function fieldRow(labelText: string, input: HTMLElement, field: string): HTMLElement {
    const row = el("div", "field-row");
    const label = el("label", undefined, labelText);
    label.appendChild(input);
    row.appendChild(label);
    const error = el("span", "field-error");
    error.dataset.errorFor = field;
    row.appendChild(error);
    return row;
}

/** Build the rating form; callers wire it with wireRubricForm. */
export function buildRubricForm(): HTMLFormElement {
    const form = el("form", "rubric-form");

    const recordId = el("input");
    recordId.type = "hidden";
    recordId.name = "record_id";
    form.appendChild(recordId);
    const recordError = el("span", "field-error");
    recordError.dataset.errorFor = "record_id";
    form.appendChild(recordError);

    const rater = el("input");
    rater.type = "text";
    rater.name = "rater_id";
    form.appendChild(fieldRow("rater", rater, "rater_id"));

    const acceptable = el("input");
    acceptable.type = "checkbox";
    acceptable.name = "acceptable";
    acceptable.checked = true;
    form.appendChild(fieldRow("acceptable", acceptable, "acceptable"));

    const reason = el("select");
    reason.name = "reject_reason";
    reason.appendChild(el("option", undefined, ""));
    for (const value of REJECT_REASONS) {
        const option = el("option", undefined, value);
        option.value = value;
        reason.appendChild(option);
    }
    form.appendChild(fieldRow("reject reason", reason, "reject_reason"));

    const hallucinations = el("input");
    hallucinations.type = "text";
    hallucinations.name = "hallucination_count";
    form.appendChild(fieldRow("hallucinations", hallucinations, "hallucination_count"));

    for (const field of LIKERT_FIELDS) {
        const input = el("input");
        input.type = "text";
        input.name = field;
        form.appendChild(fieldRow(LIKERT_LABELS[field], input, field));
    }

    const themes = el("fieldset", "themes");
    themes.appendChild(el("legend", undefined, "themes"));
    for (const tag of THEME_TAGS) {
        const box = el("input");
        box.type = "checkbox";
        box.name = "themes";
        box.value = tag;
        const label = el("label", "theme-option", tag);
        label.prepend(box);
        themes.appendChild(label);
    }
    form.appendChild(themes);

    const notes = el("textarea");
    notes.name = "notes";
    form.appendChild(fieldRow("notes", notes, "notes"));

    const submit = el("button", "submit-rating", "save rating");
    submit.type = "submit";
    form.appendChild(submit);

    const status = el("p", "form-status");
    form.appendChild(status);

    return form;
}

function namedInput(form: HTMLFormElement, name: string): HTMLInputElement {
    return form.elements.namedItem(name) as HTMLInputElement;
}

/** Read raw form state; scores stay strings until validation. */
export function readRubricForm(form: HTMLFormElement): RubricFormValues {
    const scores = {} as Record<(typeof LIKERT_FIELDS)[number], string>;
    for (const field of LIKERT_FIELDS) {
        scores[field] = namedInput(form, field).value;
    }
    const themes: string[] = [];
    form.querySelectorAll<HTMLInputElement>('input[name="themes"]:checked').forEach(
        (box) => themes.push(box.value),
    );
    const reason = form.elements.namedItem("reject_reason") as HTMLSelectElement;
    const notes = form.elements.namedItem("notes") as HTMLTextAreaElement;
    return {
        recordId: namedInput(form, "record_id").value,
        raterId: namedInput(form, "rater_id").value,
        acceptable: namedInput(form, "acceptable").checked,
        rejectReason: reason.value,
        hallucinationCount: namedInput(form, "hallucination_count").value,
        scores,
        themes,
        notes: notes.value,
    };
}

/** Clear old messages, then show one message next to each offending field. */
export function showFieldErrors(form: HTMLFormElement, errors: FieldError[]): void {
    form.querySelectorAll<HTMLElement>(".field-error").forEach((node) => {
        node.textContent = "";
    });
    for (const error of errors) {
        const slot = form.querySelector<HTMLElement>(
            `.field-error[data-error-for="${error.field}"]`,
        );
        if (slot) {
            slot.textContent = error.message;
        }
    }
}

/**
 * Wire submit handling: validate locally, surface errors inline, and only
 * call submit with a body that passed. Submit failures land in the status
 * line instead of throwing.
 */
export function wireRubricForm(
    form: HTMLFormElement,
    submit: (body: EvaluationRequestBody) => Promise<void>,
): void {
    form.addEventListener("submit", (event) => {
        event.preventDefault();
        const status = form.querySelector<HTMLElement>(".form-status");
        const result = validateRubricForm(readRubricForm(form));
        if (!result.ok) {
            showFieldErrors(form, result.errors);
            if (status) {
                status.textContent = "fix the highlighted fields";
            }
            return;
        }
        showFieldErrors(form, []);
        if (status) {
            status.textContent = "saving...";
        }
        submit(result.body)
            .then(() => {
                if (status) {
                    status.textContent = "rating saved";
                }
            })
            .catch((error: unknown) => {
                if (status) {
                    status.textContent = `save failed: ${String(error)}`;
                }
            });
    });
}
