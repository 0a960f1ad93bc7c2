import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    proxy: {
      // dev mode: the UI calls /api/..., proxied to a running prepub service
      "/api": {
        target: process.env.PREPUB_API_URL ?? "http://127.0.0.1:8840",
        changeOrigin: true,
        rewrite: (path) => path.replace(/^\/api/, ""),
      },
    },
  },
  test: {
    environment: "happy-dom",
    testTimeout: 30000,
    hookTimeout: 60000,
  },
});
