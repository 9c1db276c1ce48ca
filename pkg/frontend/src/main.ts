import { ReviewApi } from './api';
import { App } from './app';
import './style.css';

// The bundle is normally served by the review service itself, so the API
// lives at the page origin; ?api= overrides that for development.
const params = new URLSearchParams(window.location.search);
const base = params.get('api') ?? window.location.origin;
const reviewer = params.get('reviewer') ?? 'annotator';

const root = document.getElementById('app');
if (root) {
    const app = new App(root, new ReviewApi(base), reviewer);
    void app.start();
}
