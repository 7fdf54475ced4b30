// App wiring: three tabs (Documents, Chat, Benchmark) over the gateway API.
// The bearer token lives in sessionStorage and is asked for on first load.

import { ApiClient, ApiError } from './api.js';
import type { BenchmarkDatasetInput, EvaluationReport, RunRecordView } from './api.js';
import {
    appendMessage,
    canSend,
    initialChatState,
    selectModel,
    setModels,
} from './state.js';
import type { ChatViewState } from './state.js';
import {
    renderChatMessage,
    renderEmptyReportPlaceholder,
    renderErrorBanner,
    renderLatencyBars,
    renderRatingBars,
    renderRatingForm,
    renderScoreGrid,
} from './render.js';

const TOKEN_KEY = 'ragbench.token';
const POLL_INTERVAL_MS = 2000;

function getToken(): string {
    let token = sessionStorage.getItem(TOKEN_KEY);
    while (!token) {
        token = window.prompt('API token:');
        if (token) sessionStorage.setItem(TOKEN_KEY, token);
    }
    return token;
}

function showError(err: unknown): void {
    const zone = document.getElementById('errors')!;
    zone.replaceChildren();
    const message = err instanceof ApiError
        ? `${err.code}: ${err.message}`
        : String(err);
    zone.appendChild(renderErrorBanner(document, message));
    if (err instanceof ApiError && err.status === 401) {
        sessionStorage.removeItem(TOKEN_KEY);
    }
}

export async function startApp(baseUrl = ''): Promise<void> {
    const api = new ApiClient(baseUrl, getToken());
    let state: ChatViewState = initialChatState();
    let currentRunId: string | null = null;

    const tabs = ['documents', 'chat', 'benchmark'];
    for (const tab of tabs) {
        document.getElementById(`tab-${tab}`)!.addEventListener('click', () => {
            for (const other of tabs) {
                document.getElementById(`panel-${other}`)!.hidden = other !== tab;
            }
        });
    }

    try {
        state.sessionId = await api.createSession();
        state = setModels(state, await api.listModels());
    } catch (err) {
        showError(err);
        return;
    }

    const modelSelect = document.getElementById('model-select') as HTMLSelectElement;
    for (const model of state.models) {
        const opt = document.createElement('option');
        opt.value = model.model_id;
        opt.textContent = `${model.model_id} (${model.kind})`;
        modelSelect.appendChild(opt);
    }
    modelSelect.addEventListener('change', () => {
        state = selectModel(state, modelSelect.value);
    });

    // --- documents tab ---
    const fileInput = document.getElementById('file-input') as HTMLInputElement;
    const uploadStatus = document.getElementById('upload-status')!;
    document.getElementById('upload-button')!.addEventListener('click', async () => {
        const file = fileInput.files?.[0];
        if (!file || !state.sessionId) return;
        try {
            const result = await api.uploadDocument(state.sessionId, file, file.name);
            state.documents.push({
                docId: result.doc_id, name: file.name,
                pages: result.pages, chunks: result.chunks,
            });
            uploadStatus.textContent =
                `${file.name}: ${result.pages} page(s), ${result.chunks} chunk(s)`;
            const li = document.createElement('li');
            li.textContent = uploadStatus.textContent;
            document.getElementById('doc-list')!.appendChild(li);
        } catch (err) {
            showError(err);
        }
    });

    // --- chat tab ---
    const questionBox = document.getElementById('question') as HTMLInputElement;
    const sendButton = document.getElementById('send') as HTMLButtonElement;
    const transcript = document.getElementById('transcript')!;
    const refreshSend = () => {
        sendButton.disabled = !canSend(state, questionBox.value);
    };
    questionBox.addEventListener('input', refreshSend);
    refreshSend();

    sendButton.addEventListener('click', async () => {
        if (!state.sessionId || !state.selectedModelId) return;
        const question = questionBox.value.trim();
        state.queryInFlight = true;
        refreshSend();
        try {
            const result = await api.query(state.sessionId, question,
                state.selectedModelId);
            state = appendMessage(state, {
                question,
                answer: result.answer,
                modelId: result.model_id,
                contexts: result.contexts,
                latencyS: result.latency_s,
                retrievalS: result.retrieval_s,
            });
            transcript.appendChild(renderChatMessage(document,
                state.messages[state.messages.length - 1]));
            questionBox.value = '';
        } catch (err) {
            showError(err);
        } finally {
            state.queryInFlight = false;
            refreshSend();
        }
    });

    // --- benchmark tab ---
    const datasetBox = document.getElementById('dataset-json') as HTMLTextAreaElement;
    const runButton = document.getElementById('run-benchmark') as HTMLButtonElement;
    const reportZone = document.getElementById('report')!;
    const recordsZone = document.getElementById('records')!;
    reportZone.appendChild(renderEmptyReportPlaceholder(document));

    async function refreshReport(runId: string): Promise<EvaluationReport | null> {
        const report = await api.fetchReport(runId);
        if (report === null) return null;
        reportZone.replaceChildren(
            renderScoreGrid(document, report),
            renderLatencyBars(document, report),
            renderRatingBars(document, report.ratings),
        );
        return report;
    }

    async function showRecords(runId: string): Promise<void> {
        const records = await api.fetchRecords(runId);
        recordsZone.replaceChildren();
        for (const record of records as RunRecordView[]) {
            const { root } = renderRatingForm(document, record,
                async (fidelity, relevance) => {
                    try {
                        await api.submitRating(record.record_id, fidelity,
                            relevance, 'ui-rater');
                        await refreshReport(runId);
                    } catch (err) {
                        showError(err);
                    }
                });
            recordsZone.appendChild(root);
        }
    }

    runButton.addEventListener('click', async () => {
        if (!state.sessionId) return;
        let dataset: BenchmarkDatasetInput;
        try {
            dataset = JSON.parse(datasetBox.value);
        } catch {
            showError(new Error('dataset is not valid JSON'));
            return;
        }
        try {
            currentRunId = await api.startBenchmark(state.sessionId,
                state.models.map((m) => m.model_id), dataset);
        } catch (err) {
            showError(err); // 409 -> "run in progress" message from the API
            return;
        }
        const poll = window.setInterval(async () => {
            try {
                const report = await refreshReport(currentRunId!);
                if (report !== null) {
                    window.clearInterval(poll);
                    await showRecords(currentRunId!);
                }
            } catch (err) {
                window.clearInterval(poll);
                showError(err);
            }
        }, POLL_INTERVAL_MS);
    });
}

if (typeof document !== 'undefined' && document.getElementById('app')) {
    void startApp();
}
