import { defineConfig } from "vitest/config";

// the e2e file spawns the planner service; keep files sequential so the
// 200 ms ack budget is not starved by sibling test processes
export default defineConfig({
  test: {
    fileParallelism: false,
    testTimeout: 20000,
  },
});
