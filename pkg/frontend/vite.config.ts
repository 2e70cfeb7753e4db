import { defineConfig } from "vitest/config";

export default defineConfig({
  server: {
    port: 5173,
    // forward API calls to a locally running `catlas serve`
    proxy: {
      "/corpora": "http://127.0.0.1:8787",
      "/healthz": "http://127.0.0.1:8787",
    },
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
