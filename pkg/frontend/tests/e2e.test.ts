// End-to-end: the UI drives the real review service over HTTP. A fixture
// bench is written to disk, the Python server is spawned on a free port,
// and the app runs in jsdom submitting one verdict of each kind.

import { ChildProcess, spawn } from 'node:child_process';
import { mkdtempSync, readFileSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';
import { afterAll, beforeAll, describe, expect, it } from 'vitest';

import { ReviewApi } from '../src/api';
import { App } from '../src/app';

const PORT = 18000 + Math.floor(Math.random() * 4000);
const BASE = `http://127.0.0.1:${PORT}`;

interface BenchRow {
    qa_id: string;
    video_id: string;
    span: [number, number];
    task: string;
    subtype: string | null;
    question: string;
    answer: string;
    options: Record<string, string> | null;
    provenance: Record<string, unknown>;
    split: string;
    verification: string;
}

function benchRow(partial: Partial<BenchRow> & { qa_id: string; task: string }): BenchRow {
    return {
        video_id: 'v03',
        span: [0, 60],
        subtype: null,
        question: `${partial.task} question for ${partial.qa_id}?`,
        answer: `reference answer for ${partial.qa_id}`,
        options: null,
        provenance: {},
        split: 'bench',
        verification: 'unreviewed',
        ...partial,
    };
}

const FIXTURE: BenchRow[] = [
    benchRow({
        qa_id: 'avsn-240',
        task: 'AVSN',
        span: [240, 250],
        question: "Between 240 and 250 seconds, describe the person's surroundings, actions, and the sounds that can be heard?",
    }),
    benchRow({ qa_id: 'ssa-1', task: 'SSA' }),
    benchRow({ qa_id: 'avdn-1', task: 'AVDN' }),
    benchRow({
        qa_id: 'tr-1',
        task: 'TR',
        subtype: 'before:Action-Sound',
        answer: 'B',
        options: { A: 'a thud', B: 'a hiss', C: 'a whirr', D: 'a click' },
    }),
    benchRow({ qa_id: 'avh-1', task: 'AVH', subtype: 'sound:factual', answer: 'Yes' }),
    benchRow({ qa_id: 'avh-2', task: 'AVH', subtype: 'object:hallucinated', answer: 'No' }),
];

let server: ChildProcess;
let workDir: string;

async function waitForServer(): Promise<void> {
    const deadline = Date.now() + 30000;
    while (Date.now() < deadline) {
        try {
            const response = await fetch(`${BASE}/stats`);
            if (response.ok) return;
        } catch {
            // not up yet
        }
        await new Promise((resolve) => setTimeout(resolve, 200));
    }
    throw new Error('review service never came up');
}

async function waitFor(predicate: () => boolean, what: string, timeoutMs = 8000): Promise<void> {
    const deadline = Date.now() + timeoutMs;
    while (Date.now() < deadline) {
        if (predicate()) return;
        await new Promise((resolve) => setTimeout(resolve, 25));
    }
    throw new Error(`timed out waiting for ${what}`);
}

beforeAll(async () => {
    workDir = mkdtempSync(join(tmpdir(), 'review-ui-'));
    const benchPath = join(workDir, 'bench.jsonl');
    writeFileSync(benchPath, FIXTURE.map((row) => JSON.stringify(row)).join('\n') + '\n');
    const videosPath = join(workDir, 'videos.records');
    writeFileSync(
        videosPath,
        'format: egoavu-videos/1\n' +
            JSON.stringify({ video_id: 'v03', media_locator: 'media/v03.mp4', duration: 400.0, beta: 5, alpha: 5, clip_count: 4, dropped_segments: 0 }) + '\n',
    );
    server = spawn('python3', [
        '-m', 'egoavu.cli', 'review-serve',
        '--bench', benchPath,
        '--videos', videosPath,
        '--host', '127.0.0.1',
        '--port', String(PORT),
    ], { stdio: 'ignore' });
    await waitForServer();
});

afterAll(() => {
    server?.kill('SIGTERM');
});

describe('review UI against the live service', () => {
    it('loads the queue, seeks the player, and round-trips all three verdicts', async () => {
        const root = document.createElement('div');
        document.body.append(root);
        const app = new App(root, new ReviewApi(BASE), 'ui-tester');
        await app.start();

        // queue renders every unreviewed item
        const rows = root.querySelectorAll<HTMLElement>('[data-testid="queue-row"]');
        expect(rows).toHaveLength(FIXTURE.length);

        // opening the segment-narration item seeks the player to its start
        await app.openItem('avsn-240');
        expect(app.session.current?.qa_id).toBe('avsn-240');
        const question = root.querySelector('[data-testid="item-question"]')!;
        expect(question.textContent).toContain('Between 240 and 250 seconds');
        expect(app.player!.position()).toBe(240);
        const video = root.querySelector<HTMLVideoElement>('[data-testid="clip-player"]')!;
        expect(video.getAttribute('src')).toBe('media/v03.mp4');

        // modify: edit the answer, submit, wait for the refresh
        (root.querySelector('[data-testid="verdict-modify"]') as HTMLElement).click();
        const answerBox = root.querySelector<HTMLTextAreaElement>('[data-testid="edit-answer"]')!;
        answerBox.value = 'a sharper, human-verified answer';
        answerBox.dispatchEvent(new Event('input', { bubbles: true }));
        (root.querySelector('[data-testid="verdict-modify"]') as HTMLElement).click();
        await waitFor(() => app.session.stats?.modified === 1, 'modify verdict to land');

        // the session auto-advanced; accept whatever is current now
        const acceptedId = app.session.current!.qa_id;
        (root.querySelector('[data-testid="verdict-accept"]') as HTMLElement).click();
        await waitFor(() => app.session.stats?.accepted === 1, 'accept verdict to land');

        // and reject the next one
        const rejectedId = app.session.current!.qa_id;
        (root.querySelector('[data-testid="verdict-reject"]') as HTMLElement).click();
        await waitFor(() => app.session.stats?.rejected === 1, 'reject verdict to land');

        // queue drained to the remaining unreviewed items
        await waitFor(
            () => root.querySelectorAll('[data-testid="queue-row"]').length === FIXTURE.length - 3,
            'queue to shrink',
        );

        // the stats bar shows the same ratio the API reports, to UI precision
        const stats = await new ReviewApi(BASE).stats();
        expect(stats.reviewed).toBe(3);
        expect(stats.modified_ratio).toBeCloseTo(1 / 3, 10);
        const ratioLabel = root.querySelector('[data-testid="stat-ratio"]')!.textContent!;
        expect(ratioLabel).toContain((stats.modified_ratio * 100).toFixed(1));

        // verified export carries the edit and drops the rejected item
        const exported = await new ReviewApi(BASE).exportVerified();
        const lines: BenchRow[] = readFileSync(exported.path, 'utf-8')
            .trim().split('\n').map((line) => JSON.parse(line) as BenchRow);
        const ids = new Set(lines.map((row) => row.qa_id));
        expect(ids.has('avsn-240')).toBe(true);
        expect(ids.has(acceptedId)).toBe(true);
        expect(ids.has(rejectedId)).toBe(false);
        const edited = lines.find((row) => row.qa_id === 'avsn-240')!;
        expect(edited.answer).toBe('a sharper, human-verified answer');
        expect(edited.verification).toBe('modified');

        document.body.removeChild(root);
    });

    it('shows a not-found screen for an unknown item', async () => {
        const root = document.createElement('div');
        document.body.append(root);
        const app = new App(root, new ReviewApi(BASE), 'ui-tester');
        await app.start();
        await app.openItem('no-such-item');
        expect(root.querySelector('[data-testid="not-found"]')).not.toBeNull();
        document.body.removeChild(root);
    });

    it('filters the queue by task', async () => {
        const root = document.createElement('div');
        document.body.append(root);
        const app = new App(root, new ReviewApi(BASE), 'ui-tester');
        await app.start();
        app.session.filter.task = 'AVH';
        app.session.filter.status = 'any';
        await app.refresh();
        const rows = [...root.querySelectorAll<HTMLElement>('[data-testid="queue-row"]')];
        expect(rows.length).toBeGreaterThan(0);
        for (const row of rows) {
            expect(row.textContent).toContain('AVH');
        }
        document.body.removeChild(root);
    });
});
