// View state for the three tabs. Pure helpers so the logic is testable
// without a DOM.

import type { ContextHit, ModelInfo } from './api.js';

export interface ChatMessage {
    question: string;
    answer: string;
    modelId: string;
    contexts: ContextHit[];
    latencyS: number;
    retrievalS: number;
}

export interface UploadedDoc {
    docId: string;
    name: string;
    pages: number;
    chunks: number;
}

export interface ChatViewState {
    sessionId: string | null;
    models: ModelInfo[];
    selectedModelId: string | null;
    messages: ChatMessage[];
    documents: UploadedDoc[];
    queryInFlight: boolean;
    uploadStatus: string;
}

export function initialChatState(): ChatViewState {
    return {
        sessionId: null,
        models: [],
        selectedModelId: null,
        messages: [],
        documents: [],
        queryInFlight: false,
        uploadStatus: '',
    };
}

export function setModels(state: ChatViewState, models: ModelInfo[]): ChatViewState {
    const stillValid = models.some((m) => m.model_id === state.selectedModelId);
    return {
        ...state,
        models,
        selectedModelId: stillValid
            ? state.selectedModelId
            : (models[0]?.model_id ?? null),
    };
}

export function selectModel(state: ChatViewState, modelId: string): ChatViewState {
    if (!state.models.some((m) => m.model_id === modelId)) {
        return state; // never select a model the API did not list
    }
    return { ...state, selectedModelId: modelId };
}

export function appendMessage(state: ChatViewState, msg: ChatMessage): ChatViewState {
    return { ...state, messages: [...state.messages, msg] };
}

export function canSend(state: ChatViewState, question: string): boolean {
    return question.trim().length > 0
        && !state.queryInFlight
        && state.selectedModelId !== null
        && state.documents.length > 0;
}

export interface RatingFormState {
    recordId: string;
    fidelityPct: number;
    relevancePct: number;
}

export function clampPct(value: number): number {
    if (Number.isNaN(value)) return 0;
    return Math.min(100, Math.max(0, Math.round(value)));
}

export function makeRatingForm(recordId: string, fidelity = 50,
                               relevance = 50): RatingFormState {
    return {
        recordId,
        fidelityPct: clampPct(fidelity),
        relevancePct: clampPct(relevance),
    };
}

export function ratingValid(form: RatingFormState): boolean {
    return form.fidelityPct >= 0 && form.fidelityPct <= 100
        && form.relevancePct >= 0 && form.relevancePct <= 100;
}

/** Display rounding only; all score math stays server-side. */
export function fmtScore(value: number): string {
    return value.toFixed(2);
}
