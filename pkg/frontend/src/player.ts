// Clip playback wrapper: load the item's media locator and seek to the
// reviewed span. jsdom has no real media pipeline, so the last seek target
// is also tracked locally and used as the fallback position.

export class ClipPlayer {
    readonly element: HTMLVideoElement;
    private readonly placeholder: HTMLElement;
    private lastSeekTarget = 0;

    constructor(container: HTMLElement) {
        this.element = document.createElement('video');
        this.element.controls = true;
        this.element.dataset.testid = 'clip-player';
        this.placeholder = document.createElement('div');
        this.placeholder.className = 'player-warning';
        this.placeholder.dataset.testid = 'player-warning';
        this.placeholder.hidden = true;
        this.placeholder.textContent = 'No media locator for this item — review from the text only.';
        container.append(this.element, this.placeholder);
    }

    load(locator: string | null, span: [number, number]): void {
        if (!locator) {
            this.element.hidden = true;
            this.element.removeAttribute('src');
            this.placeholder.hidden = false;
            this.lastSeekTarget = span[0];
            return;
        }
        this.placeholder.hidden = true;
        this.element.hidden = false;
        if (this.element.getAttribute('src') !== locator) {
            this.element.setAttribute('src', locator);
        }
        this.seekTo(span[0]);
    }

    seekTo(seconds: number): void {
        this.lastSeekTarget = seconds;
        try {
            this.element.currentTime = seconds;
        } catch {
            // non-playing environments keep only the tracked target
        }
    }

    position(): number {
        const native = Number.isFinite(this.element.currentTime) ? this.element.currentTime : 0;
        return native > 0 ? native : this.lastSeekTarget;
    }
}
