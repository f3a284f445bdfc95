/**
 * Thin typed client over the review service HTTP API.
 *
 * The fetch implementation is injectable so tests can run against a fake
 * without a live server.
 */

import type {
    EvaluationRecordDto,
    EvaluationRequestBody,
    GenerateRequestBody,
    GenerationRecordDto,
    SessionRow,
    SessionStateDto,
    SnapshotSequenceDto,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Non-2xx response, with the service's detail message when present. */
export class ApiError extends Error {
    readonly status: number;
    readonly detail: string;

    constructor(status: number, detail: string) {
        super(`HTTP ${status}: ${detail}`);
        this.name = "ApiError";
        this.status = status;
        this.detail = detail;
    }
}

async function errorDetail(response: Response): Promise<string> {
    try {
        const body = (await response.json()) as { detail?: unknown };
        if (typeof body.detail === "string") {
            return body.detail;
        }
        if (body.detail !== undefined) {
            return JSON.stringify(body.detail);
        }
        return JSON.stringify(body);
    } catch {
        return response.statusText || "request failed";
    }
}

export interface SnapshotQuery {
    thresholdMs?: number;
    dedup?: boolean;
}

export class ApiClient {
    private readonly baseUrl: string;
    private readonly fetchImpl: FetchLike;

    constructor(baseUrl = "", fetchImpl?: FetchLike) {
        this.baseUrl = baseUrl.replace(/\/$/, "");
        this.fetchImpl = fetchImpl ?? ((url, init) => fetch(url, init));
    }

    private async getJson<T>(path: string): Promise<T> {
        const response = await this.fetchImpl(this.baseUrl + path);
        if (!response.ok) {
            throw new ApiError(response.status, await errorDetail(response));
        }
        return (await response.json()) as T;
    }

    private async postJson<T>(path: string, body: unknown): Promise<T> {
        const response = await this.fetchImpl(this.baseUrl + path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
        if (!response.ok) {
            throw new ApiError(response.status, await errorDetail(response));
        }
        return (await response.json()) as T;
    }

    listSessions(): Promise<SessionRow[]> {
        return this.getJson("/api/sessions");
    }

    snapshots(session: string, query: SnapshotQuery = {}): Promise<SnapshotSequenceDto> {
        const params = new URLSearchParams();
        if (query.thresholdMs !== undefined) {
            params.set("threshold_ms", String(query.thresholdMs));
        }
        if (query.dedup) {
            params.set("dedup", "true");
        }
        const suffix = params.toString() ? `?${params.toString()}` : "";
        return this.getJson(`/api/sessions/${encodeURIComponent(session)}/snapshots${suffix}`);
    }

    state(session: string, at: number): Promise<SessionStateDto> {
        return this.getJson(`/api/sessions/${encodeURIComponent(session)}/state?at=${at}`);
    }

    records(session?: string): Promise<GenerationRecordDto[]> {
        const suffix = session === undefined ? "" : `?session=${encodeURIComponent(session)}`;
        return this.getJson(`/api/records${suffix}`);
    }

    /**
     * Run one generation. A failed generation still produces a record; the
     * service ships it with status 503, so that shape is returned rather
     * than thrown.
     */
    async generate(body: GenerateRequestBody): Promise<GenerationRecordDto> {
        const response = await this.fetchImpl(this.baseUrl + "/api/generate", {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
        if (response.ok || response.status === 503) {
            return (await response.json()) as GenerationRecordDto;
        }
        throw new ApiError(response.status, await errorDetail(response));
    }

    submitEvaluation(body: EvaluationRequestBody): Promise<EvaluationRecordDto> {
        return this.postJson("/api/evaluations", body);
    }

    report(): Promise<Record<string, unknown>> {
        return this.getJson("/api/report");
    }
}
