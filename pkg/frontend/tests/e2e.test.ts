/**
 * Scripted end-to-end session against a live engine:
 * task build -> solve -> what-if criterion flip -> explanation browse ->
 * know-how row addition -> re-solve. Every request/response passes through
 * the schema-validating client.
 */
import { spawn, spawnSync, type ChildProcess } from "node:child_process";
import { mkdtempSync, rmSync } from "node:fs";
import { tmpdir } from "node:os";
import { join } from "node:path";
import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { EngineClient } from "../src/api";
import { SessionStore } from "../src/state";

const PORT = 8941;
const BASE = `http://127.0.0.1:${PORT}`;

let server: ChildProcess | null = null;
let workdir: string;

async function waitForEngine(timeoutMs = 30000): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (Date.now() < deadline) {
    try {
      const response = await fetch(`${BASE}/model`);
      if (response.ok) return;
    } catch {
      // not up yet
    }
    await new Promise((resolve) => setTimeout(resolve, 250));
  }
  throw new Error("engine did not come up in time");
}

beforeAll(async () => {
  workdir = mkdtempSync(join(tmpdir(), "kh-ui-e2e-"));
  const build = spawnSync("python3", [
    "-c",
    `from pathlib import Path; from knowhow_dss.demo import build_demo; build_demo(Path(${JSON.stringify(workdir)}) / "pack")`,
  ], { encoding: "utf8" });
  if (build.status !== 0) {
    throw new Error(`demo build failed: ${build.stderr}`);
  }
  server = spawn("python3", [
    "-m", "knowhow_dss.cli",
    "--workspace", join(workdir, "pack"),
    "serve", "--port", String(PORT),
  ], { stdio: "ignore" });
  await waitForEngine();
}, 60000);

afterAll(() => {
  server?.kill();
  rmSync(workdir, { recursive: true, force: true });
});

describe("live what-if session", () => {
  const store = new SessionStore(new EngineClient(BASE));

  it("loads the model summary", async () => {
    const summary = await store.loadModel();
    expect(summary.schemaVersion).toBe(1);
    expect(summary.scales.length).toBeGreaterThanOrEqual(8);
    expect(store.scaleValuesFor("workpiece_material")).toContain("carbon_steel");
  });

  it("builds and solves the default task", async () => {
    expect(store.setInput("workpiece_material", "carbon_steel")).toBe(true);
    expect(store.setInput("hardness_band", "medium")).toBe(true);
    expect(store.setInput("flute_count", "4")).toBe(true);
    for (const out of [
      "cutting_speed", "edge_angle", "feed_rate", "machining_time", "tool_life",
    ]) {
      store.toggleOutput(out);
    }
    store.setCriterion({ kind: "maximize", objective: "tool_life" });
    expect(store.canSubmit()).toBe(true);
    const panel = await store.runWhatIf("tool life");
    expect(panel.response.solutions.length).toBe(1);
    expect(panel.response.solutions[0]!.values["tool_life"]).toBe("180");
    expect(panel.response.solutions[0]!.values["cutting_speed"]).toBe("120");
  });

  it("criterion flip produces a second, different panel", async () => {
    store.setCriterion({ kind: "minimize", objective: "machining_time" });
    const panel = await store.runWhatIf("machining time");
    expect(store.panels.length).toBe(2);
    const first = store.panels[0]!.response.solutions[0]!.values;
    const second = panel.response.solutions[0]!.values;
    expect(second["cutting_speed"]).toBe("240");
    expect(second["machining_time"]).toBe("60");
    expect(first["cutting_speed"]).not.toBe(second["cutting_speed"]);
  });

  it("browses the explanation tree down to ground premises", async () => {
    const solutionId = store.panels[0]!.response.solutions[0]!.id;
    const tree = await store.openExplanation(solutionId);
    expect(tree).not.toBeNull();
    const rows = tree!.rows();
    expect(rows.some((r) => r.kind === "input")).toBe(true);
    expect(rows.some((r) => r.kind === "fact")).toBe(true);
    expect(rows.some((r) => r.note && r.note.includes("know-how"))).toBe(true);
    // collapse/expand keeps the selection
    const fact = rows.find((r) => r.kind === "fact")!;
    tree!.select(fact.key);
    tree!.toggle("tool_life");
    tree!.toggle("tool_life");
    expect(tree!.selectedKey).toBe(fact.key);
  });

  it("unknown explanation ids surface as an expired notice", async () => {
    const tree = await store.openExplanation("0000000000000000");
    expect(tree).toBeNull();
    expect(store.expiredExplanations.has("0000000000000000")).toBe(true);
  });

  it("adds a know-how table and re-solves against the new model", async () => {
    const oldHash = store.summary!.modelHash;
    store.startTableDraft("uiwin", "UiTrialWindowKH", [
      { name: "hardness", scale: "Hardness", role: "condition" },
      { name: "angle", scale: "AngleDeg", role: "condition" },
    ]);
    store.editor.title = "trial windows from the editor";
    store.editor.binding = { hardness: "hardness_band", angle: "edge_angle" };
    for (const hardness of ["soft", "medium", "hard"]) {
      for (const angle of ["6", "8", "10", "12", "14", "16"]) {
        store.addDraftRow([hardness, angle]);
      }
    }
    expect(store.draftIssues()).toEqual([]);
    const diagnostics = await store.submitDraft();
    expect(diagnostics).toBeNull();
    expect(store.banner).toContain("re-run open tasks");
    expect(store.summary!.modelHash).not.toBe(oldHash);
    // previous panels ran on the old snapshot
    expect(store.panels.every((p) => p.stale)).toBe(true);

    const panel = await store.runWhatIf("re-run after know-how edit");
    expect(panel.stale).toBe(false);
    expect(panel.response.solutions.length).toBe(1);
    const tree = await store.openExplanation(panel.response.solutions[0]!.id);
    const cited = JSON.stringify(tree!.explanation);
    expect(cited).toContain("kh_uiwin");
  });

  it("off-scale drafts are blocked locally before any request", async () => {
    store.startTableDraft("uibad", "UiTrialWindowKH", [
      { name: "hardness", scale: "Hardness", role: "condition" },
      { name: "angle", scale: "AngleDeg", role: "condition" },
    ]);
    store.addDraftRow(["soft", "77"]);
    const issues = store.draftIssues();
    expect(issues.some((i) => i.code === "E-SCALE")).toBe(true);
    await expect(store.submitDraft()).rejects.toThrow(/local errors/);
  });

  it("validate and session endpoints answer through the typed client", async () => {
    const validation = await store.client.validate("life");
    expect(validation.diagnostics.every((d) => d.severity !== "error")).toBe(true);
    const session = await store.client.session();
    expect(session.entries.length).toBeGreaterThanOrEqual(3);
  });
});
