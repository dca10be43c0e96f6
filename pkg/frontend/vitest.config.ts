import { defineConfig } from "vitest/config";

export default defineConfig({
	test: {
		environment: "node",
		globalSetup: ["tests/globalSetup.ts"],
		testTimeout: 60_000,
		hookTimeout: 60_000,
		// E2E tests share one engine instance; keep them sequential
		fileParallelism: false,
	},
});
