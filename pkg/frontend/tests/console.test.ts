// Console loop against a mock-backed gateway: observe a pause, submit a
// modification, verify the next captured prompt carries the text, race
// two sessions on one pause, and keep form state honest throughout.

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { GatewayClient } from "../src/api.js";
import { ConsoleViewModel } from "../src/viewmodel.js";
import { FIXTURE_CATALOG, FIXTURE_COURSE, startStack, until, type Stack } from "./harness.js";

let stack: Stack;
let client: GatewayClient;

beforeAll(async () => {
  stack = await startStack(18191, 18175);
  client = new GatewayClient(stack.baseUrl);
}, 60000);

afterAll(async () => {
  await stack?.stop();
});

interface TranscriptMessage {
  role_label: string;
  content: string;
}

interface Transcript {
  messages: TranscriptMessage[];
}

async function approveUntilClosed(vm: ConsoleViewModel, runId: string): Promise<void> {
  const decided = new Set<string>();
  await until(async () => {
    const run = await client.getRun(runId);
    if (run.closed) return true;
    const pause = await client.getPause(runId);
    if (pause && !decided.has(pause.pause_id)) {
      decided.add(pause.pause_id);
      await vm.decide("approve");
    }
    return false;
  }, 60000);
}

describe("co-pilot console loop", () => {
  it(
    "observes a pause, submits Modify, and the rerun prompt carries the text",
    async () => {
      const runId = await client.createRun(FIXTURE_COURSE, FIXTURE_CATALOG);
      const vm = new ConsoleViewModel(client);
      await vm.openRun(runId);

      expect(vm.canDecide() || vm.pause === null).toBe(true);
      await until(async () => {
        if (!vm.pause) await vm.refreshPause();
        return vm.pause;
      });
      expect(vm.pause!.subtask).toBe("objectives_definition");
      expect(vm.canDecide()).toBe(true);
      expect(vm.canEditCatalog()).toBe(true);
      expect(Object.keys(vm.pause!.artifacts_preview)).toContain("objectives");

      const originalPauseId = vm.pause!.pause_id;
      const suggestion = "Make every objective start with a measurable verb.";
      const outcome = await vm.modify(suggestion);
      expect(outcome.ok).toBe(true);

      // the modify rerun re-pauses on the same subtask with fresh artifacts
      const repause = await until(async () => {
        const pause = await client.getPause(runId);
        return pause && pause.pause_id !== originalPauseId ? pause : null;
      });
      expect(repause.subtask).toBe("objectives_definition");

      // the captured prompt of the rerun deliberation ends with the text
      const transcripts = await client.getTranscript(runId, "objectives_definition");
      const items = transcripts.items as Transcript[];
      const firstUser = items[0]!.messages.find((m) => m.role_label === "user");
      expect(firstUser!.content).toContain(suggestion);
      expect(firstUser!.content.trimEnd().endsWith(suggestion)).toBe(true);

      await approveUntilClosed(vm, runId);
      const run = await client.getRun(runId);
      expect(run.closed).toBe(true);
      expect(vm.canDecide()).toBe(false);
      await vm.drain();
    },
    120000,
  );

  it(
    "double-submit from two sessions: one wins, the other sees already-decided",
    async () => {
      const runId = await client.createRun(FIXTURE_COURSE, FIXTURE_CATALOG);
      const sessionA = new ConsoleViewModel(client);
      const sessionB = new ConsoleViewModel(client);
      await sessionA.openRun(runId);
      await sessionB.openRun(runId);

      await until(async () => {
        await sessionA.refreshPause();
        await sessionB.refreshPause();
        return sessionA.pause && sessionB.pause;
      });

      const [a, b] = await Promise.all([sessionA.approve(), sessionB.approve()]);
      const outcomes = [a, b];
      expect(outcomes.filter((o) => o.ok)).toHaveLength(1);
      const loser = outcomes.find((o) => !o.ok)!;
      expect(loser.reason).toBe("already_decided");
      const loserSession = a.ok ? sessionB : sessionA;
      expect(loserSession.notice).toContain("already decided");

      await approveUntilClosed(sessionA, runId);
      await sessionA.drain();
      await sessionB.drain();
    },
    120000,
  );

  it(
    "catalog edits are accepted at a pause and refused after completion",
    async () => {
      const runId = await client.createRun(FIXTURE_COURSE, FIXTURE_CATALOG);
      const vm = new ConsoleViewModel(client);
      await vm.openRun(runId);
      await until(async () => {
        if (!vm.pause) await vm.refreshPause();
        return vm.pause;
      });

      expect(vm.canEditCatalog()).toBe(true);
      await vm.saveCatalog({ teaching_constraints: { max_slide_count: 42 } });
      const stored = await client.getCatalog(runId);
      expect((stored["teaching_constraints"] as Record<string, unknown>)["max_slide_count"]).toBe(42);

      await approveUntilClosed(vm, runId);
      expect(vm.canEditCatalog()).toBe(false);
      await expect(
        vm.saveCatalog({ teaching_constraints: { max_slide_count: 10 } }),
      ).rejects.toThrow(/paused/);
      await vm.drain();
    },
    120000,
  );

  it(
    "feedback composer reruns a completed subtask through the gateway",
    async () => {
      const runId = await client.createRun(
        { ...FIXTURE_COURSE, mode: "feedback_guided" },
        undefined,
      );
      const vm = new ConsoleViewModel(client);
      await until(async () => (await client.getRun(runId)).closed, 60000);
      await vm.openRun(runId);

      await vm.sendFeedback("assessment_planning", "Add a peer-review stage.");
      const run = await client.getRun(runId);
      expect(run.stale).toContain("materials_generation");
      const transcripts = await client.getTranscript(runId, "assessment_planning");
      const items = transcripts.items as Transcript[];
      const firstUser = items[0]!.messages.find((m) => m.role_label === "user");
      expect(firstUser!.content).toContain("Add a peer-review stage.");
      await vm.drain();
    },
    120000,
  );
});
