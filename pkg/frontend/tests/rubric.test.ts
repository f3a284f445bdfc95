import { beforeEach, describe, expect, it, vi } from "vitest";

import { validateRubricForm } from "../src/rubric.js";
import type { RubricFormValues } from "../src/rubric.js";
import type { EvaluationRequestBody } from "../src/types.js";
import { buildRubricForm, wireRubricForm } from "../src/views.js";

function values(overrides: Partial<RubricFormValues> = {}): RubricFormValues {
    return {
        recordId: "S1_fluky_feedback_alpha-large",
        raterId: "rater_a",
        acceptable: true,
        rejectReason: "",
        hallucinationCount: "0",
        scores: {
            process_focus: "4",
            specificity: "4",
            correctness: "5",
            utility: "3",
        },
        themes: ["incremental_testing"],
        notes: "",
        ...overrides,
    };
}

function errorFields(result: ReturnType<typeof validateRubricForm>): string[] {
    return result.ok ? [] : result.errors.map((e) => e.field);
}

describe("rubric validation", () => {
    it("accepts a complete rating and builds the request body", () => {
        const result = validateRubricForm(values());
        expect(result.ok).toBe(true);
        if (result.ok) {
            expect(result.body).toEqual({
                record_id: "S1_fluky_feedback_alpha-large",
                rater_id: "rater_a",
                acceptable: true,
                reject_reason: null,
                rubric: {
                    hallucination_count: 0,
                    process_focus: 4,
                    specificity: 4,
                    correctness: 5,
                    utility: 3,
                },
                themes: ["incremental_testing"],
                notes: "",
            });
        }
    });

    it("rejects likert scores outside 1..5", () => {
        for (const bad of ["0", "6", "-2"]) {
            const result = validateRubricForm(
                values({ scores: { ...values().scores, utility: bad } }),
            );
            expect(errorFields(result)).toEqual(["utility"]);
        }
    });

    it("rejects non-integer scores", () => {
        const result = validateRubricForm(
            values({ scores: { ...values().scores, correctness: "good" } }),
        );
        expect(errorFields(result)).toEqual(["correctness"]);
    });

    it("rejects a negative hallucination count", () => {
        const result = validateRubricForm(values({ hallucinationCount: "-1" }));
        expect(errorFields(result)).toEqual(["hallucination_count"]);
    });

    it("requires a reason when the response is rejected", () => {
        const missing = validateRubricForm(
            values({ acceptable: false, rejectReason: "" }),
        );
        expect(errorFields(missing)).toEqual(["reject_reason"]);

        const given = validateRubricForm(
            values({ acceptable: false, rejectReason: "generic_only" }),
        );
        expect(given.ok).toBe(true);
        if (given.ok) {
            expect(given.body.reject_reason).toBe("generic_only");
            expect(given.body.acceptable).toBe(false);
        }
    });

    it("allows skipping the rubric entirely", () => {
        const result = validateRubricForm(
            values({
                hallucinationCount: "",
                scores: {
                    process_focus: "",
                    specificity: "",
                    correctness: "",
                    utility: "",
                },
            }),
        );
        expect(result.ok).toBe(true);
        if (result.ok) {
            expect(result.body.rubric).toBeNull();
        }
    });

    it("rejects a half-filled rubric", () => {
        const result = validateRubricForm(
            values({
                hallucinationCount: "",
                scores: {
                    process_focus: "4",
                    specificity: "",
                    correctness: "",
                    utility: "",
                },
            }),
        );
        expect(result.ok).toBe(false);
        expect(errorFields(result)).toContain("hallucination_count");
        expect(errorFields(result)).toContain("specificity");
    });

    it("requires a rater id and a picked record", () => {
        expect(errorFields(validateRubricForm(values({ raterId: " " })))).toEqual([
            "rater_id",
        ]);
        expect(errorFields(validateRubricForm(values({ recordId: "" })))).toEqual([
            "record_id",
        ]);
    });
});

describe("rating form wiring", () => {
    let form: HTMLFormElement;
    let submitted: EvaluationRequestBody[];
    let submitSpy: (body: EvaluationRequestBody) => Promise<void>;

    function setInput(name: string, value: string): void {
        (form.elements.namedItem(name) as HTMLInputElement).value = value;
    }

    function fillValid(): void {
        setInput("record_id", "S1_fluky_feedback_alpha-large");
        setInput("rater_id", "rater_a");
        setInput("hallucination_count", "0");
        setInput("process_focus", "4");
        setInput("specificity", "4");
        setInput("correctness", "5");
        setInput("utility", "3");
    }

    beforeEach(() => {
        document.body.innerHTML = "";
        form = buildRubricForm();
        document.body.appendChild(form);
        submitted = [];
        submitSpy = vi.fn((body: EvaluationRequestBody) => {
            submitted.push(body);
            return Promise.resolve();
        });
        wireRubricForm(form, submitSpy);
    });

    it("rejects a range violation inline without submitting", () => {
        fillValid();
        setInput("utility", "6");
        form.dispatchEvent(new Event("submit", { cancelable: true }));

        expect(submitSpy).not.toHaveBeenCalled();
        const slot = form.querySelector<HTMLElement>(
            '.field-error[data-error-for="utility"]',
        )!;
        expect(slot.textContent).toBe("must be between 1 and 5");
        expect(form.querySelector(".form-status")!.textContent).toBe(
            "fix the highlighted fields",
        );
    });

    it("rejects a rejection without a reason inline", () => {
        fillValid();
        (form.elements.namedItem("acceptable") as HTMLInputElement).checked = false;
        form.dispatchEvent(new Event("submit", { cancelable: true }));

        expect(submitSpy).not.toHaveBeenCalled();
        const slot = form.querySelector<HTMLElement>(
            '.field-error[data-error-for="reject_reason"]',
        )!;
        expect(slot.textContent).toContain("needs a reason");
    });

    it("submits a valid rating and clears old errors", async () => {
        fillValid();
        setInput("utility", "6");
        form.dispatchEvent(new Event("submit", { cancelable: true }));
        expect(submitSpy).not.toHaveBeenCalled();

        setInput("utility", "3");
        const themeBox = form.querySelector<HTMLInputElement>(
            'input[name="themes"][value="planning_ahead"]',
        )!;
        themeBox.checked = true;
        form.dispatchEvent(new Event("submit", { cancelable: true }));
        await Promise.resolve();

        expect(submitSpy).toHaveBeenCalledTimes(1);
        expect(submitted[0].rubric!.utility).toBe(3);
        expect(submitted[0].themes).toEqual(["planning_ahead"]);
        const slot = form.querySelector<HTMLElement>(
            '.field-error[data-error-for="utility"]',
        )!;
        expect(slot.textContent).toBe("");
        expect(form.querySelector(".form-status")!.textContent).toBe("rating saved");
    });

    it("reports a server rejection in the status line", async () => {
        document.body.innerHTML = "";
        form = buildRubricForm();
        document.body.appendChild(form);
        wireRubricForm(form, () => Promise.reject(new Error("HTTP 404: unknown record")));
        fillValid();
        form.dispatchEvent(new Event("submit", { cancelable: true }));
        await Promise.resolve();
        await Promise.resolve();

        const status = form.querySelector(".form-status")!;
        expect(status.textContent).toContain("save failed");
        expect(status.textContent).toContain("unknown record");
    });
});
