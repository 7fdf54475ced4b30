// Typed client for the gateway HTTP API. All score math happens server-side;
// this module only moves JSON.

export interface ApiErrorBody {
    code: string;
    message: string;
}

export class ApiError extends Error {
    constructor(
        public readonly status: number,
        public readonly code: string,
        message: string,
    ) {
        super(message);
        this.name = 'ApiError';
    }
}

export interface ModelInfo {
    model_id: string;
    kind: string;
}

export interface UploadResult {
    doc_id: string;
    pages: number;
    chunks: number;
}

export interface ContextHit {
    chunk_id: string;
    similarity: number;
    text: string;
}

export interface QueryResult {
    answer: string;
    model_id: string;
    contexts: ContextHit[];
    latency_s: number;
    retrieval_s: number;
}

export interface ReportCell {
    group: string;
    model_id: string;
    meteor: number;
    chrf: number;
    latency_minutes: number;
    n: number;
    n_failed: number;
}

export interface RatingSummary {
    model_id: string;
    fidelity_pct: number;
    relevance_pct: number;
    combined_pct: number;
    n: number;
}

export interface EvaluationReport {
    cells: ReportCell[];
    ratings: RatingSummary[];
    models: string[];
    chrf_beta: number;
    meteor_variant: string;
    generated_at: string;
    latency_valid: boolean;
}

export interface RunRecordView {
    record_id: string;
    item_id: string;
    model_id: string;
    group: string;
    answer_text: string;
    meteor: number | null;
    chrf: number | null;
    latency_s: number;
    retrieval_s: number;
    error: string | null;
}

export interface BenchmarkDatasetInput {
    name: string;
    items: Array<{ id: string; group: string; question: string; reference: string }>;
}

type FetchLike = typeof fetch;

export class ApiClient {
    constructor(
        private readonly baseUrl: string,
        private token: string,
        private readonly fetchImpl: FetchLike = fetch,
    ) {}

    setToken(token: string): void {
        this.token = token;
    }

    private async request(path: string, init: RequestInit = {}): Promise<Response> {
        const headers = new Headers(init.headers);
        headers.set('Authorization', `Bearer ${this.token}`);
        const resp = await this.fetchImpl(`${this.baseUrl}${path}`, { ...init, headers });
        if (!resp.ok && resp.status !== 202) {
            let body: ApiErrorBody = { code: 'unknown', message: resp.statusText };
            try {
                body = await resp.json();
            } catch {
                // non-JSON error body; keep the fallback
            }
            throw new ApiError(resp.status, body.code, body.message);
        }
        return resp;
    }

    private async postJson(path: string, payload: unknown): Promise<Response> {
        return this.request(path, {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(payload),
        });
    }

    async createSession(): Promise<string> {
        const resp = await this.postJson('/api/sessions', {});
        return (await resp.json()).session_id;
    }

    async uploadDocument(sessionId: string, file: File | Blob, name: string,
                         title?: string): Promise<UploadResult> {
        const form = new FormData();
        form.append('session_id', sessionId);
        form.append('title', title ?? name);
        form.append('file', file, name);
        const resp = await this.request('/api/documents', { method: 'POST', body: form });
        return resp.json();
    }

    async listModels(): Promise<ModelInfo[]> {
        const resp = await this.request('/api/models');
        return resp.json();
    }

    async query(sessionId: string, question: string, modelId: string,
                k?: number): Promise<QueryResult> {
        const resp = await this.postJson(`/api/sessions/${sessionId}/query`,
            { question, model_id: modelId, k: k ?? null });
        return resp.json();
    }

    async startBenchmark(sessionId: string, modelIds: string[],
                         dataset: BenchmarkDatasetInput,
                         strict = false): Promise<string> {
        const resp = await this.postJson('/api/benchmark/run', {
            session_id: sessionId,
            model_ids: modelIds,
            dataset,
            strict,
        });
        return (await resp.json()).run_id;
    }

    /** null while the run is still in progress (202). */
    async fetchReport(runId: string): Promise<EvaluationReport | null> {
        const resp = await this.request(`/api/benchmark/${runId}/report?format=json`);
        if (resp.status === 202) {
            return null;
        }
        return resp.json();
    }

    async fetchRecords(runId: string): Promise<RunRecordView[]> {
        const resp = await this.request(`/api/benchmark/${runId}/records`);
        return (await resp.json()).records;
    }

    async submitRating(recordId: string, fidelityPct: number, relevancePct: number,
                       raterId: string): Promise<void> {
        await this.postJson('/api/ratings', {
            record_id: recordId,
            fidelity_pct: fidelityPct,
            relevance_pct: relevancePct,
            rater_id: raterId,
        });
    }
}
