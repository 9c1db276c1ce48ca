// Typed client over the review service. The API is the single source of
// truth: the UI never mutates benchmark state except through POST /verdict.

export interface QAItemView {
    qa_id: string;
    video_id: string;
    span: [number, number];
    task: string;
    subtype: string | null;
    question: string;
    answer: string;
    options: Record<string, string> | null;
    status: string;
}

export interface ItemDetail extends QAItemView {
    media_locator: string | null;
    video_duration: number | null;
}

export interface QueuePage {
    items: QAItemView[];
    page: number;
    page_size: number;
    total: number;
}

export interface Stats {
    per_task: Record<string, Record<string, number>>;
    total: number;
    reviewed: number;
    accepted: number;
    modified: number;
    rejected: number;
    unreviewed: number;
    modified_ratio: number;
}

export type VerdictKind = 'accept' | 'modify' | 'reject';

export interface VerdictBody {
    qa_id: string;
    verdict: VerdictKind;
    edited_question?: string | null;
    edited_answer?: string | null;
    reviewer: string;
}

export interface QueueFilter {
    task?: string;
    status?: string;
    page?: number;
    pageSize?: number;
}

export class ApiError extends Error {
    constructor(readonly status: number, message: string) {
        super(message);
        this.name = 'ApiError';
    }
}

export class ReviewApi {
    constructor(private readonly baseUrl: string) {}

    private async request<T>(path: string, init?: RequestInit): Promise<T> {
        const response = await fetch(this.baseUrl + path, init);
        if (!response.ok) {
            const body = await response.text();
            throw new ApiError(response.status, `${path} failed (${response.status}): ${body}`);
        }
        return (await response.json()) as T;
    }

    queue(filter: QueueFilter = {}): Promise<QueuePage> {
        const params = new URLSearchParams();
        if (filter.task) params.set('task', filter.task);
        if (filter.status) params.set('status', filter.status);
        params.set('page', String(filter.page ?? 1));
        params.set('page_size', String(filter.pageSize ?? 20));
        return this.request<QueuePage>(`/queue?${params.toString()}`);
    }

    item(qaId: string): Promise<ItemDetail> {
        return this.request<ItemDetail>(`/item/${encodeURIComponent(qaId)}`);
    }

    submitVerdict(body: VerdictBody): Promise<{ ok: boolean; qa_id: string; status: string }> {
        return this.request('/verdict', {
            method: 'POST',
            headers: { 'Content-Type': 'application/json' },
            body: JSON.stringify(body),
        });
    }

    stats(): Promise<Stats> {
        return this.request<Stats>('/stats');
    }

    exportVerified(): Promise<{ path: string; exported: number; excluded: number }> {
        return this.request('/export-verified', { method: 'POST' });
    }
}
