import { defineConfig } from "vitest/config";

// Every binding call spawns the Python CLI (~0.8 s interpreter startup), and
// the cross-interface suite makes dozens of calls, so the budgets are wide.
export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    testTimeout: 300_000,
    hookTimeout: 120_000,
  },
});
