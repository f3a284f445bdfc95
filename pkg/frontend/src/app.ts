/**
 * Page wiring: session picker, step timeline with diff, generation records
 * and the rating form, all against the JSON API on the same origin.
 */

import { ApiClient } from "./api.js";
import { Timeline } from "./timeline.js";
import type { GenerationRecordDto, SessionRow } from "./types.js";
import { TASKS } from "./types.js";
import {
    buildRubricForm,
    highlightMarker,
    renderRecordList,
    renderStepDiff,
    renderStepPanel,
    renderTimeline,
    wireRubricForm,
} from "./views.js";

interface PageElements {
    sessionSelect: HTMLSelectElement;
    timeline: HTMLElement;
    stepHeader: HTMLElement;
    stepText: HTMLElement;
    diff: HTMLElement;
    records: HTMLElement;
    rubricSlot: HTMLElement;
    taskSelect: HTMLSelectElement;
    modelInput: HTMLInputElement;
    modelOptions: HTMLDataListElement;
    generateButton: HTMLButtonElement;
    generateStatus: HTMLElement;
}

function grabElements(): PageElements | null {
    const byId = (id: string) => document.getElementById(id);
    const sessionSelect = byId("session-select");
    if (!(sessionSelect instanceof HTMLSelectElement)) {
        return null;
    }
    return {
        sessionSelect,
        timeline: byId("timeline") as HTMLElement,
        stepHeader: byId("step-header") as HTMLElement,
        stepText: byId("step-text") as HTMLElement,
        diff: byId("diff") as HTMLElement,
        records: byId("records") as HTMLElement,
        rubricSlot: byId("rubric-slot") as HTMLElement,
        taskSelect: byId("task-select") as HTMLSelectElement,
        modelInput: byId("model-input") as HTMLInputElement,
        modelOptions: byId("model-options") as HTMLDataListElement,
        generateButton: byId("generate-button") as HTMLButtonElement,
        generateStatus: byId("generate-status") as HTMLElement,
    };
}

export class ReviewApp {
    private readonly client: ApiClient;
    private readonly els: PageElements;
    private timeline: Timeline | null = null;
    private rubricForm: HTMLFormElement;

    constructor(client: ApiClient, els: PageElements) {
        this.client = client;
        this.els = els;
        this.rubricForm = buildRubricForm();
        this.els.rubricSlot.appendChild(this.rubricForm);
        wireRubricForm(this.rubricForm, (body) =>
            this.client.submitEvaluation(body).then(() => undefined),
        );

        for (const task of TASKS) {
            const option = document.createElement("option");
            option.value = task;
            option.textContent = task;
            this.els.taskSelect.appendChild(option);
        }

        this.els.sessionSelect.addEventListener("change", () => {
            void this.loadSession(this.els.sessionSelect.value);
        });
        this.els.generateButton.addEventListener("click", () => {
            void this.generate();
        });
    }

    async start(): Promise<void> {
        const sessions = await this.client.listSessions();
        this.fillSessionPicker(sessions);
        if (sessions.length > 0) {
            await this.loadSession(sessions[0].session);
        }
    }

    private fillSessionPicker(sessions: SessionRow[]): void {
        this.els.sessionSelect.textContent = "";
        for (const row of sessions) {
            const option = document.createElement("option");
            option.value = row.session;
            option.textContent = `${row.session} (${row.event_count} events)`;
            this.els.sessionSelect.appendChild(option);
        }
    }

    private async loadSession(session: string): Promise<void> {
        this.els.sessionSelect.value = session;
        const sequence = await this.client.snapshots(session);
        const timeline = new Timeline(sequence);
        this.timeline = timeline;
        renderTimeline(this.els.timeline, timeline, (index) => this.selectStep(index));
        this.selectStep(0);
        await this.refreshRecords(session);
    }

    private selectStep(index: number): void {
        if (!this.timeline) {
            return;
        }
        const marker = this.timeline.select(index);
        highlightMarker(this.els.timeline, this.timeline.selectedIndex);
        renderStepPanel(this.els.stepHeader, this.els.stepText, marker);
        renderStepDiff(this.els.diff, this.timeline);
    }

    private async refreshRecords(session: string): Promise<void> {
        const records = await this.client.records(session);
        renderRecordList(this.els.records, records, (record) => this.pickRecord(record));
        this.fillModelOptions(records);
    }

    private fillModelOptions(records: GenerationRecordDto[]): void {
        const seen = [...new Set(records.map((r) => r.model_id))];
        this.els.modelOptions.textContent = "";
        for (const modelId of seen) {
            const option = document.createElement("option");
            option.value = modelId;
            this.els.modelOptions.appendChild(option);
        }
    }

    private pickRecord(record: GenerationRecordDto): void {
        const hidden = this.rubricForm.elements.namedItem("record_id") as HTMLInputElement;
        hidden.value = record.record_id;
        const status = this.rubricForm.querySelector<HTMLElement>(".form-status");
        if (status) {
            status.textContent = `rating ${record.record_id}`;
        }
    }

    private async generate(): Promise<void> {
        const session = this.els.sessionSelect.value;
        if (!session) {
            return;
        }
        this.els.generateStatus.textContent = "generating...";
        try {
            const record = await this.client.generate({
                session,
                task: this.els.taskSelect.value,
                model: this.els.modelInput.value.trim(),
            });
            this.els.generateStatus.textContent =
                record.status === "ok"
                    ? `done: ${record.record_id}`
                    : `failed: ${record.error_detail ?? "error"}`;
            await this.refreshRecords(session);
        } catch (error) {
            this.els.generateStatus.textContent = `request rejected: ${String(error)}`;
        }
    }
}

function boot(): void {
    const els = grabElements();
    if (!els) {
        return;
    }
    const app = new ReviewApp(new ApiClient(""), els);
    void app.start();
}

if (typeof document !== "undefined") {
    if (document.readyState === "loading") {
        document.addEventListener("DOMContentLoaded", boot);
    } else {
        boot();
    }
}
