/** Canned engine responses for stub-backed tests; kept schema-valid. */
import {
  Explanation,
  ExplanationSchema,
  ModelSummary,
  ModelSummarySchema,
  SolveResponse,
  SolveResponseSchema,
} from "../src/schemas";

export const modelSummary: ModelSummary = ModelSummarySchema.parse({
  schemaVersion: 1,
  modelHash: "b80874a93491be53",
  scales: [
    { name: "AngleDeg", kind: "int", unit: "deg", values: ["6", "8", "10", "12", "14", "16"] },
    { name: "Hardness", kind: "enum", unit: null, values: ["soft", "medium", "hard"] },
    {
      name: "Material", kind: "enum", unit: null,
      values: ["carbon_steel", "alloy_steel", "stainless_steel", "aluminum"],
    },
    { name: "Speed", kind: "int", unit: "m/min", values: ["60", "120", "180", "240", "300"] },
  ],
  symbols: [
    { name: "cutting_speed", kind: "const", scale: "Speed" },
    { name: "edge_angle", kind: "const", scale: "AngleDeg" },
    { name: "hardness_band", kind: "const", scale: "Hardness" },
    { name: "workpiece_material", kind: "const", scale: "Material" },
  ],
  tasks: [
    {
      name: "life",
      inputs: { workpiece_material: "carbon_steel", hardness_band: "medium" },
      outputs: ["cutting_speed", "edge_angle"],
      criterion: { kind: "maximize", objective: "tool_life" },
    },
  ],
  criteria: ["none", "maximize", "minimize", "predicate"],
});

export const solveResponse: SolveResponse = SolveResponseSchema.parse({
  schemaVersion: 1,
  modelHash: "b80874a93491be53",
  solutionSetId: "cda1d94ec856a36c",
  solutions: [
    { id: "9ef6f99bd075390c", values: { cutting_speed: "120", edge_angle: "12" } },
  ],
  diagnostics: [],
});

export const explanation: Explanation = ExplanationSchema.parse({
  roots: { cutting_speed: "cutting_speed", edge_angle: "edge_angle" },
  nodes: {
    edge_angle: {
      symbol: "edge_angle",
      value: "12",
      justifications: [
        {
          rule: "AngleKH(f^2) -> f^2(workpiece_material, hardness_band) = edge_angle",
          assignment: [["f", "kh_t01_angle_angle"]],
          premises: [
            { kind: "input", symbol: "workpiece_material", args: [], value: "carbon_steel", note: null },
            { kind: "input", symbol: "hardness_band", args: [], value: "medium", note: null },
            {
              kind: "fact", symbol: "kh_t01_angle_angle",
              args: ["carbon_steel", "medium"], value: "12",
              note: "know-how t01_angle 'End mill edge angles' row 2",
            },
          ],
        },
      ],
    },
    cutting_speed: {
      symbol: "cutting_speed",
      value: "120",
      justifications: [
        {
          rule: "SpeedOptionsKH(p^2) -> p^2(workpiece_material, hardness_band, cutting_speed)",
          assignment: [["p", "kh_t02_speeds"]],
          premises: [
            { kind: "derived", node: "edge_angle" },
            {
              kind: "fact", symbol: "kh_t02_speeds",
              args: ["carbon_steel", "medium", "120"], value: null, note: null,
            },
          ],
        },
      ],
    },
  },
});
