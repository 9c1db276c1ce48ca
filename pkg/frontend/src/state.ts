// Client-side review session: queue position, current item, draft edits,
// and local progress counters reconciled against /stats.

import {
    ItemDetail,
    QueueFilter,
    QAItemView,
    ReviewApi,
    Stats,
    VerdictKind,
} from './api';

export interface Drafts {
    question: string | null;
    answer: string | null;
}

export class ReviewSession {
    filter: QueueFilter = { status: 'unreviewed', page: 1, pageSize: 20 };
    queue: QAItemView[] = [];
    total = 0;
    current: ItemDetail | null = null;
    drafts: Drafts = { question: null, answer: null };
    editing = false;
    counters: Record<VerdictKind, number> = { accept: 0, modify: 0, reject: 0 };
    stats: Stats | null = null;
    lastError: string | null = null;

    constructor(readonly api: ReviewApi, readonly reviewer: string) {}

    async loadQueue(): Promise<void> {
        const page = await this.api.queue(this.filter);
        this.queue = page.items;
        this.total = page.total;
    }

    async refreshStats(): Promise<void> {
        this.stats = await this.api.stats();
    }

    /** Open an item for review; any unsubmitted drafts are discarded. */
    async open(qaId: string): Promise<ItemDetail> {
        this.discardDrafts();
        this.current = await this.api.item(qaId);
        return this.current;
    }

    discardDrafts(): void {
        this.drafts = { question: null, answer: null };
        this.editing = false;
    }

    beginEdit(): void {
        if (!this.current) return;
        this.editing = true;
        this.drafts = { question: this.current.question, answer: this.current.answer };
    }

    hasEdits(): boolean {
        if (!this.current) return false;
        const changedQuestion = this.drafts.question !== null && this.drafts.question !== this.current.question;
        const changedAnswer = this.drafts.answer !== null && this.drafts.answer !== this.current.answer;
        return changedQuestion || changedAnswer;
    }

    /** Submit a verdict for the current item and advance down the queue. */
    async submit(kind: VerdictKind): Promise<void> {
        if (!this.current) throw new Error('no item open');
        const body = {
            qa_id: this.current.qa_id,
            verdict: kind,
            reviewer: this.reviewer,
            edited_question: null as string | null,
            edited_answer: null as string | null,
        };
        if (kind === 'modify') {
            if (!this.hasEdits()) throw new Error('a modify verdict needs an edited question or answer');
            if (this.drafts.question !== this.current.question) body.edited_question = this.drafts.question;
            if (this.drafts.answer !== this.current.answer) body.edited_answer = this.drafts.answer;
        }
        await this.api.submitVerdict(body);
        this.counters[kind] += 1;
        const reviewedId = this.current.qa_id;
        this.discardDrafts();
        this.current = null;
        await this.loadQueue();
        await this.refreshStats();
        const next = this.queue.find((item) => item.qa_id !== reviewedId);
        if (next) {
            await this.open(next.qa_id);
        }
    }
}
