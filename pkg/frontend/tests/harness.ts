// Spawns the real gateway (backed by the bundled deterministic mock
// backend) for console tests. Everything runs over localhost sockets.

import { type ChildProcess, spawn } from "node:child_process";
import { mkdtemp, rm } from "node:fs/promises";
import { tmpdir } from "node:os";
import { join } from "node:path";

export interface Stack {
  baseUrl: string;
  runRoot: string;
  stop(): Promise<void>;
}

async function waitForHealth(url: string, timeoutMs = 20000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(url);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 150));
  }
  throw new Error(`service at ${url} never became healthy`);
}

function terminate(child: ChildProcess): Promise<void> {
  return new Promise((resolve) => {
    if (child.exitCode !== null) return resolve();
    child.once("exit", () => resolve());
    child.kill("SIGTERM");
    setTimeout(() => {
      if (child.exitCode === null) child.kill("SIGKILL");
    }, 2000);
  });
}

export async function startStack(mockPort: number, gatewayPort: number): Promise<Stack> {
  const runRoot = await mkdtemp(join(tmpdir(), "courseforge-console-"));
  const python = process.env.PYTHON ?? "python3";

  const mock = spawn(python, ["-m", "courseforge.agents.mock", "--port", String(mockPort)], {
    stdio: "ignore",
  });
  const gateway = spawn(
    python,
    [
      "-m", "courseforge.cli",
      "--base-url", `http://127.0.0.1:${mockPort}/v1`,
      "--run-root", runRoot,
      "--no-latex",
      "serve", "--port", String(gatewayPort),
    ],
    { stdio: "ignore" },
  );

  await waitForHealth(`http://127.0.0.1:${mockPort}/healthz`);
  await waitForHealth(`http://127.0.0.1:${gatewayPort}/healthz`);

  return {
    baseUrl: `http://127.0.0.1:${gatewayPort}`,
    runRoot,
    async stop() {
      await terminate(gateway);
      await terminate(mock);
      await rm(runRoot, { recursive: true, force: true });
    },
  };
}

export const FIXTURE_COURSE = {
  course_title: "Data Mining",
  level: "undergraduate",
  topic_hint: "3-week microcourse",
  mode: "full_copilot",
};

export const FIXTURE_CATALOG = {
  teaching_constraints: { max_slide_count: 50 },
};

export async function until<T>(
  probe: () => Promise<T | null | undefined | false>,
  timeoutMs = 30000,
  intervalMs = 100,
): Promise<T> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    const value = await probe();
    if (value) return value;
    await new Promise((resolve) => setTimeout(resolve, intervalMs));
  }
  throw new Error("condition never became true");
}
