import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["tests/**/*.test.ts"],
    // the e2e suite spawns the python service and drives thousands of
    // ping-pong ticks; give it room
    testTimeout: 120_000,
    hookTimeout: 60_000,
  },
});
