import { defineConfig } from 'vite';

// The bundle is mounted under /ui by the review service, so asset URLs
// must stay relative to index.html.
export default defineConfig({
    base: './',
    build: {
        outDir: 'dist',
        sourcemap: true,
    },
});
