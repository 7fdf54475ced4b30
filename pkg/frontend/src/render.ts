// DOM builders for the chat transcript and the benchmark dashboard.
// Everything rendered here comes straight from API responses; the only
// client-side math is 2-decimal display rounding.

import type { EvaluationReport, RatingSummary, ReportCell, RunRecordView } from './api.js';
import type { ChatMessage } from './state.js';
import { fmtScore } from './state.js';

const GROUP_LABELS: Record<string, string> = {
    clinical: 'G1 (clinical)',
    visual: 'G2 (visual)',
    general: 'G3 (general)',
};
const GROUP_ORDER = ['clinical', 'visual', 'general'];

function el<K extends keyof HTMLElementTagNameMap>(
    doc: Document, tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
    const node = doc.createElement(tag);
    if (className) node.className = className;
    if (text !== undefined) node.textContent = text;
    return node;
}

export function renderErrorBanner(doc: Document, message: string): HTMLElement {
    return el(doc, 'div', 'error-banner', message);
}

export function renderChatMessage(doc: Document, msg: ChatMessage): HTMLElement {
    const wrapper = el(doc, 'div', 'chat-message');
    wrapper.appendChild(el(doc, 'div', 'chat-question', msg.question));
    wrapper.appendChild(el(doc, 'div', 'chat-answer', msg.answer));

    const badge = el(doc, 'span', 'latency-badge',
        `${msg.modelId} · ${msg.latencyS.toFixed(2)}s`);
    wrapper.appendChild(badge);

    const details = el(doc, 'details', 'contexts');
    details.appendChild(el(doc, 'summary', undefined,
        `${msg.contexts.length} context chunk(s)`));
    for (const ctx of msg.contexts) {
        const block = el(doc, 'div', 'context-chunk');
        block.appendChild(el(doc, 'div', 'context-similarity',
            `similarity ${ctx.similarity.toFixed(3)}`));
        block.appendChild(el(doc, 'pre', 'context-text', ctx.text));
        details.appendChild(block);
    }
    wrapper.appendChild(details);
    return wrapper;
}

/** Table-style score grid: one row per group, METEOR + chrF per model. */
export function renderScoreGrid(doc: Document, report: EvaluationReport): HTMLElement {
    const table = el(doc, 'table', 'score-grid');
    const header = el(doc, 'tr');
    header.appendChild(el(doc, 'th', undefined, 'Group'));
    for (const model of report.models) {
        header.appendChild(el(doc, 'th', undefined, `${model} METEOR`));
        header.appendChild(el(doc, 'th', undefined, `${model} chrF`));
    }
    table.appendChild(header);

    const byKey = new Map<string, ReportCell>();
    for (const cell of report.cells) {
        byKey.set(`${cell.group}|${cell.model_id}`, cell);
    }
    for (const group of GROUP_ORDER) {
        if (!report.cells.some((c) => c.group === group)) continue;
        const row = el(doc, 'tr');
        row.appendChild(el(doc, 'td', undefined, GROUP_LABELS[group] ?? group));
        for (const model of report.models) {
            const cell = byKey.get(`${group}|${model}`);
            row.appendChild(el(doc, 'td', 'meteor-cell',
                cell ? fmtScore(cell.meteor) : '-'));
            row.appendChild(el(doc, 'td', 'chrf-cell',
                cell ? fmtScore(cell.chrf) : '-'));
        }
        table.appendChild(row);
    }
    return table;
}

/** Horizontal latency bars per (group, model), minutes. */
export function renderLatencyBars(doc: Document, report: EvaluationReport): HTMLElement {
    const container = el(doc, 'div', 'latency-bars');
    if (!report.latency_valid) {
        container.appendChild(el(doc, 'p', 'muted',
            'Latency omitted (concurrent run).'));
        return container;
    }
    const max = Math.max(...report.cells.map((c) => c.latency_minutes), 0.0001);
    for (const cell of report.cells) {
        const row = el(doc, 'div', 'bar-row');
        row.appendChild(el(doc, 'span', 'bar-label',
            `${GROUP_LABELS[cell.group] ?? cell.group} ${cell.model_id}`));
        const bar = el(doc, 'div', 'bar');
        bar.style.width = `${(cell.latency_minutes / max) * 100}%`;
        row.appendChild(bar);
        row.appendChild(el(doc, 'span', 'bar-value',
            `${cell.latency_minutes.toFixed(2)} min`));
        container.appendChild(row);
    }
    return container;
}

/** Rating-average bars per model: fidelity, relevance, combined. */
export function renderRatingBars(doc: Document,
                                 ratings: RatingSummary[]): HTMLElement {
    const container = el(doc, 'div', 'rating-bars');
    if (ratings.length === 0) {
        container.appendChild(el(doc, 'p', 'muted placeholder', 'No ratings yet.'));
        return container;
    }
    for (const summary of ratings) {
        const block = el(doc, 'div', 'rating-block');
        block.appendChild(el(doc, 'h4', undefined,
            `${summary.model_id} (n=${summary.n})`));
        const metrics: Array<[string, number]> = [
            ['fidelity', summary.fidelity_pct],
            ['relevance', summary.relevance_pct],
            ['combined', summary.combined_pct],
        ];
        for (const [label, value] of metrics) {
            const row = el(doc, 'div', `bar-row rating-${label}`);
            row.appendChild(el(doc, 'span', 'bar-label', label));
            const bar = el(doc, 'div', 'bar');
            bar.style.width = `${value}%`;
            row.appendChild(bar);
            row.appendChild(el(doc, 'span', 'bar-value', `${value.toFixed(1)}%`));
            container.appendChild(block);
            block.appendChild(row);
        }
    }
    return container;
}

export function renderEmptyReportPlaceholder(doc: Document): HTMLElement {
    return el(doc, 'p', 'muted placeholder',
        'No benchmark report yet. Run a benchmark to see scores.');
}

export interface RatingFormHandles {
    root: HTMLElement;
    fidelity: HTMLInputElement;
    relevance: HTMLInputElement;
    submit: HTMLButtonElement;
}

export function renderRatingForm(doc: Document, record: RunRecordView,
                                 onSubmit: (fidelity: number, relevance: number) => void,
): RatingFormHandles {
    const root = el(doc, 'div', 'rating-form');
    root.dataset.recordId = record.record_id;
    root.appendChild(el(doc, 'div', 'rating-answer', record.answer_text));

    const makeSlider = (label: string): HTMLInputElement => {
        const row = el(doc, 'label', 'slider-row', `${label} `);
        const input = doc.createElement('input');
        input.type = 'range';
        input.min = '0';
        input.max = '100';
        input.value = '50';
        row.appendChild(input);
        root.appendChild(row);
        return input;
    };
    const fidelity = makeSlider('fidelity');
    const relevance = makeSlider('relevance');

    const submit = el(doc, 'button', 'rating-submit', 'Submit rating');
    const validate = () => {
        const f = Number(fidelity.value);
        const r = Number(relevance.value);
        submit.disabled = !(f >= 0 && f <= 100 && r >= 0 && r <= 100);
    };
    fidelity.addEventListener('input', validate);
    relevance.addEventListener('input', validate);
    validate();
    submit.addEventListener('click', () => {
        onSubmit(Number(fidelity.value), Number(relevance.value));
    });
    root.appendChild(submit);
    return { root, fidelity, relevance, submit };
}
