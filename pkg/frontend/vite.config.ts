import { defineConfig } from "vitest/config";

// API calls are proxied to the engine service during development.
const API_PATHS = [
  "/cohorts",
  "/predictions",
  "/cost-matrices",
  "/cip",
  "/dca",
  "/patients",
  "/agent-runs",
  "/runs",
  "/cards",
];

export default defineConfig({
  server: {
    proxy: Object.fromEntries(
      API_PATHS.map((path) => [path, "http://127.0.0.1:8000"]),
    ),
  },
  test: {
    environment: "jsdom",
    include: ["tests/**/*.test.ts"],
  },
});
