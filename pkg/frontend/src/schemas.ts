/**
 * Recorded wire schemas for every engine endpoint. Each request the UI sends
 * and each response it consumes is validated against these, so a drifting
 * contract fails loudly instead of rendering garbage.
 */
import { z } from "zod";

export const ScaleSchema = z.object({
  name: z.string(),
  kind: z.enum(["enum", "int", "decimal"]),
  unit: z.string().nullable(),
  values: z.array(z.string()),
});

export const SymbolSchema = z.object({
  name: z.string(),
  kind: z.enum(["const", "func", "pred"]),
  scale: z.string().nullable(),
});

export const CriterionSchema = z.object({
  kind: z.enum(["none", "maximize", "minimize", "predicate"]),
  objective: z.string().optional(),
  predicate: z.string().optional(),
});

export const TaskSummarySchema = z.object({
  name: z.string(),
  inputs: z.record(z.string(), z.string()),
  outputs: z.array(z.string()),
  criterion: CriterionSchema,
});

export const ModelSummarySchema = z.object({
  schemaVersion: z.number(),
  modelHash: z.string(),
  scales: z.array(ScaleSchema),
  symbols: z.array(SymbolSchema),
  tasks: z.array(TaskSummarySchema),
  criteria: z.array(z.string()),
});

export const DiagnosticSchema = z.object({
  code: z.string(),
  severity: z.string(),
  location: z.string(),
  message: z.string(),
  witness: z.string().nullable().optional(),
});

export const SolveRequestSchema = z.object({
  task: z.string().optional(),
  inputs: z.record(z.string(), z.string()).optional(),
  outputs: z.array(z.string()).optional(),
  criterion: CriterionSchema.optional(),
});

export const SolutionSchema = z.object({
  id: z.string(),
  values: z.record(z.string(), z.string()),
});

export const SolveResponseSchema = z.object({
  schemaVersion: z.number(),
  modelHash: z.string(),
  solutionSetId: z.string().nullable(),
  solutions: z.array(SolutionSchema),
  diagnostics: z.array(DiagnosticSchema),
});

export const PremiseSchema = z.union([
  z.object({
    kind: z.enum(["input", "fact"]),
    symbol: z.string(),
    args: z.array(z.string()),
    value: z.string().nullable(),
    note: z.string().nullable().optional(),
  }),
  z.object({ kind: z.literal("derived"), node: z.string() }),
]);

export const ExplanationNodeSchema = z.object({
  symbol: z.string(),
  value: z.string(),
  justifications: z.array(
    z.object({
      rule: z.string(),
      assignment: z.array(z.array(z.string())),
      premises: z.array(PremiseSchema),
    }),
  ),
});

export const ExplanationSchema = z.object({
  roots: z.record(z.string(), z.string()),
  nodes: z.record(z.string(), ExplanationNodeSchema),
});

export const ExplanationResponseSchema = z.object({
  schemaVersion: z.number(),
  modelHash: z.string(),
  solutionId: z.string(),
  explanation: ExplanationSchema,
});

export const KnowHowRequestSchema = z.object({
  document: z.string(),
  binding: z.record(z.string(), z.string()),
  classname: z.string(),
});

export const KnowHowResponseSchema = z.object({
  schemaVersion: z.number(),
  modelHash: z.string(),
  tableId: z.string(),
  delta: z.object({
    scales: z.number(),
    symbols: z.number(),
    variables: z.number(),
    facts: z.number(),
    formulas: z.array(z.string()),
  }),
});

export const ErrorBodySchema = z.object({
  schemaVersion: z.number().optional(),
  diagnostics: z.array(DiagnosticSchema).optional(),
  detail: z.unknown().optional(),
});

export const ValidateResponseSchema = z.object({
  schemaVersion: z.number(),
  modelHash: z.string(),
  diagnostics: z.array(DiagnosticSchema),
});

export const SessionResponseSchema = z.object({
  schemaVersion: z.number(),
  modelHash: z.string(),
  entries: z.array(
    z.object({
      solutionSetId: z.string(),
      task: z.string(),
      modelHash: z.string(),
      timestamp: z.string(),
      solutions: z.array(SolutionSchema),
    }),
  ),
});

export type ModelSummary = z.infer<typeof ModelSummarySchema>;
export type ScaleInfo = z.infer<typeof ScaleSchema>;
export type SolveRequest = z.infer<typeof SolveRequestSchema>;
export type SolveResponse = z.infer<typeof SolveResponseSchema>;
export type Explanation = z.infer<typeof ExplanationSchema>;
export type ExplanationResponse = z.infer<typeof ExplanationResponseSchema>;
export type KnowHowResponse = z.infer<typeof KnowHowResponseSchema>;
export type Diagnostic = z.infer<typeof DiagnosticSchema>;
export type CriterionSpec = z.infer<typeof CriterionSchema>;
export type Premise = z.infer<typeof PremiseSchema>;
