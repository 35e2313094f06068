import { describe, expect, it } from "vitest";

import {
  ExplanationResponseSchema,
  KnowHowResponseSchema,
  SolveRequestSchema,
  SolveResponseSchema,
  ValidateResponseSchema,
} from "../src/schemas";
import { explanation, modelSummary, solveResponse } from "./fixtures";

describe("recorded endpoint schemas", () => {
  it("accepts the recorded model summary", () => {
    expect(modelSummary.schemaVersion).toBe(1);
    expect(modelSummary.scales.length).toBeGreaterThan(0);
  });

  it("accepts recorded solve bodies and rejects malformed ones", () => {
    expect(solveResponse.solutions[0]?.values["edge_angle"]).toBe("12");
    expect(() =>
      SolveResponseSchema.parse({ ...solveResponse, solutions: [{ id: 1 }] }),
    ).toThrow();
  });

  it("solve requests constrain criterion kinds", () => {
    expect(() =>
      SolveRequestSchema.parse({ criterion: { kind: "fastest" } }),
    ).toThrow();
    SolveRequestSchema.parse({
      inputs: { workpiece_material: "carbon_steel" },
      outputs: ["edge_angle"],
      criterion: { kind: "maximize", objective: "tool_life" },
    });
  });

  it("explanation graphs keep derived links resolvable", () => {
    const body = ExplanationResponseSchema.parse({
      schemaVersion: 1,
      modelHash: "b80874a93491be53",
      solutionId: "9ef6f99bd075390c",
      explanation,
    });
    for (const node of Object.values(body.explanation.nodes)) {
      for (const j of node.justifications) {
        for (const p of j.premises) {
          if (p.kind === "derived") {
            expect(body.explanation.nodes[p.node]).toBeDefined();
          }
        }
      }
    }
  });

  it("knowhow and validate responses parse", () => {
    KnowHowResponseSchema.parse({
      schemaVersion: 1,
      modelHash: "x",
      tableId: "t",
      delta: { scales: 0, symbols: 1, variables: 1, facts: 3, formulas: ["A -> B = c"] },
    });
    ValidateResponseSchema.parse({
      schemaVersion: 1,
      modelHash: "x",
      diagnostics: [
        { code: "W-UNCONVERTIBLE", severity: "warning", location: "f", message: "m", witness: null },
      ],
    });
  });
});
