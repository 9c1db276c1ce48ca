// Review screen: queue on the left, current item with player and verdict
// controls on the right. Keyboard-first: A accept, E edit, R reject,
// Enter submits an edit in progress.

import { QAItemView, ReviewApi, VerdictKind } from './api';
import { ClipPlayer } from './player';
import { ReviewSession } from './state';

const TASKS = ['SSA', 'AVSN', 'AVDN', 'TR', 'AVH'];

function el<K extends keyof HTMLElementTagNameMap>(
    tag: K,
    attrs: Record<string, string> = {},
    text?: string,
): HTMLElementTagNameMap[K] {
    const node = document.createElement(tag);
    for (const [key, value] of Object.entries(attrs)) {
        if (key === 'class') node.className = value;
        else if (key.startsWith('data-')) node.setAttribute(key, value);
        else node.setAttribute(key, value);
    }
    if (text !== undefined) node.textContent = text;
    return node;
}

function formatSpan(span: [number, number]): string {
    return `${span[0].toFixed(0)}–${span[1].toFixed(0)} s`;
}

export class App {
    readonly session: ReviewSession;
    player: ClipPlayer | null = null;

    private queueList!: HTMLElement;
    private statsBar!: HTMLElement;
    private itemPanel!: HTMLElement;
    private banner!: HTMLElement;

    constructor(private readonly root: HTMLElement, api: ReviewApi, reviewer: string) {
        this.session = new ReviewSession(api, reviewer);
    }

    async start(): Promise<void> {
        this.buildSkeleton();
        document.addEventListener('keydown', (event) => this.onKey(event));
        await this.refresh();
    }

    private buildSkeleton(): void {
        this.root.replaceChildren();
        this.banner = el('div', { class: 'banner', 'data-testid': 'banner' });
        this.banner.hidden = true;
        this.statsBar = el('header', { class: 'stats', 'data-testid': 'stats-bar' });
        const main = el('main', { class: 'layout' });
        const queuePane = el('section', { class: 'queue-pane' });
        queuePane.append(el('h2', {}, 'Review queue'), this.filterControls());
        this.queueList = el('ul', { class: 'queue', 'data-testid': 'queue' });
        queuePane.append(this.queueList);
        this.itemPanel = el('section', { class: 'item-pane', 'data-testid': 'item-panel' });
        main.append(queuePane, this.itemPanel);
        this.root.append(this.banner, this.statsBar, main);
    }

    private filterControls(): HTMLElement {
        const row = el('div', { class: 'filters' });
        const select = el('select', { 'data-testid': 'task-filter' });
        select.append(el('option', { value: '' }, 'all tasks'));
        for (const task of TASKS) select.append(el('option', { value: task }, task));
        select.addEventListener('change', () => {
            this.session.filter.task = select.value || undefined;
            void this.refresh();
        });
        row.append(select);
        return row;
    }

    async refresh(): Promise<void> {
        try {
            await this.session.loadQueue();
            await this.session.refreshStats();
            this.banner.hidden = true;
        } catch (error) {
            this.banner.hidden = false;
            this.banner.textContent = `Cannot reach the review service (${String(error)}). Retry shortly.`;
            return;
        }
        this.renderStats();
        this.renderQueue();
        this.renderItem();
    }

    private renderStats(): void {
        const stats = this.session.stats;
        if (!stats) return;
        const ratio = (stats.modified_ratio * 100).toFixed(1);
        this.statsBar.replaceChildren(
            el('span', { 'data-testid': 'stat-total' }, `${stats.total} items`),
            el('span', { 'data-testid': 'stat-reviewed' }, `${stats.reviewed} reviewed`),
            el('span', { 'data-testid': 'stat-accepted' }, `${stats.accepted} accepted`),
            el('span', { 'data-testid': 'stat-modified' }, `${stats.modified} modified`),
            el('span', { 'data-testid': 'stat-rejected' }, `${stats.rejected} rejected`),
            el('span', { 'data-testid': 'stat-ratio' }, `modified ratio ${ratio}%`),
        );
    }

    private renderQueue(): void {
        this.queueList.replaceChildren();
        if (this.session.queue.length === 0) {
            this.queueList.append(el('li', { class: 'empty', 'data-testid': 'queue-empty' },
                'Queue empty — nothing left to review with this filter.'));
            return;
        }
        for (const item of this.session.queue) {
            this.queueList.append(this.queueRow(item));
        }
    }

    private queueRow(item: QAItemView): HTMLElement {
        const row = el('li', { class: 'queue-row', 'data-testid': 'queue-row', 'data-qa-id': item.qa_id });
        row.append(
            el('span', { class: `badge task-${item.task}` }, item.task),
            el('span', { class: 'span' }, formatSpan(item.span)),
            el('span', { class: 'status' }, item.status),
            el('span', { class: 'question' }, item.question.slice(0, 80)),
        );
        row.addEventListener('click', () => void this.openItem(item.qa_id));
        return row;
    }

    async openItem(qaId: string): Promise<void> {
        try {
            await this.session.open(qaId);
        } catch (error) {
            this.itemPanel.replaceChildren(
                el('p', { class: 'not-found', 'data-testid': 'not-found' },
                    `Item ${qaId} was not found (${String(error)}).`));
            return;
        }
        this.renderItem();
    }

    private renderItem(): void {
        const item = this.session.current;
        this.itemPanel.replaceChildren();
        this.player = null;
        if (!item) {
            this.itemPanel.append(el('p', { class: 'hint' },
                'Select an item — A accepts, E edits, R rejects.'));
            return;
        }
        const header = el('div', { class: 'item-header' });
        header.append(
            el('span', { class: `badge task-${item.task}` }, item.task + (item.subtype ? ` · ${item.subtype}` : '')),
            el('span', { 'data-testid': 'item-span' }, formatSpan(item.span)),
            el('span', { class: 'status', 'data-testid': 'item-status' }, item.status),
        );
        const playerBox = el('div', { class: 'player-box' });
        this.player = new ClipPlayer(playerBox);
        this.player.load(item.media_locator, item.span);

        const question = el('p', { class: 'question', 'data-testid': 'item-question' }, item.question);
        const answer = el('p', { class: 'answer', 'data-testid': 'item-answer' }, item.answer);
        this.itemPanel.append(header, playerBox, question, answer);

        if (item.options) {
            const list = el('ol', { class: 'options', 'data-testid': 'item-options' });
            for (const label of Object.keys(item.options).sort()) {
                list.append(el('li', {}, `${label}. ${item.options[label]}`));
            }
            this.itemPanel.append(list);
        }

        if (this.session.editing) {
            this.itemPanel.append(this.editForm());
        }
        this.itemPanel.append(this.verdictButtons());
    }

    private editForm(): HTMLElement {
        const form = el('div', { class: 'edit-form', 'data-testid': 'edit-form' });
        const question = el('textarea', { 'data-testid': 'edit-question' });
        question.value = this.session.drafts.question ?? '';
        question.addEventListener('input', () => { this.session.drafts.question = question.value; });
        const answer = el('textarea', { 'data-testid': 'edit-answer' });
        answer.value = this.session.drafts.answer ?? '';
        answer.addEventListener('input', () => { this.session.drafts.answer = answer.value; });
        form.append(el('label', {}, 'Question'), question, el('label', {}, 'Answer'), answer);
        return form;
    }

    private verdictButtons(): HTMLElement {
        const bar = el('div', { class: 'verdicts' });
        const accept = el('button', { 'data-testid': 'verdict-accept' }, 'Accept (A)');
        accept.addEventListener('click', () => void this.submit('accept'));
        const modify = el('button', { 'data-testid': 'verdict-modify' },
            this.session.editing ? 'Submit edit (Enter)' : 'Edit (E)');
        modify.addEventListener('click', () => {
            if (this.session.editing) void this.submit('modify');
            else { this.session.beginEdit(); this.renderItem(); }
        });
        const reject = el('button', { 'data-testid': 'verdict-reject' }, 'Reject (R)');
        reject.addEventListener('click', () => void this.submit('reject'));
        bar.append(accept, modify, reject);
        return bar;
    }

    async submit(kind: VerdictKind): Promise<void> {
        try {
            await this.session.submit(kind);
            this.banner.hidden = true;
        } catch (error) {
            this.banner.hidden = false;
            this.banner.textContent = `Verdict rejected: ${String(error)}`;
            return;
        }
        this.renderStats();
        this.renderQueue();
        this.renderItem();
    }

    private onKey(event: KeyboardEvent): void {
        const target = event.target as HTMLElement | null;
        const typing = target && (target.tagName === 'TEXTAREA' || target.tagName === 'INPUT');
        if (typing && event.key !== 'Enter') return;
        if (!this.session.current) return;
        if (event.key === 'a' || event.key === 'A') void this.submit('accept');
        else if (event.key === 'r' || event.key === 'R') void this.submit('reject');
        else if (event.key === 'e' || event.key === 'E') {
            this.session.beginEdit();
            this.renderItem();
        } else if (event.key === 'Enter' && this.session.editing) {
            void this.submit('modify');
        }
    }
}
