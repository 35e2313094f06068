/**
 * Typed client over the engine's JSON endpoints. Every outgoing request body
 * and incoming response is schema-validated.
 */
import {
  ErrorBodySchema,
  ExplanationResponse,
  ExplanationResponseSchema,
  KnowHowRequestSchema,
  KnowHowResponse,
  KnowHowResponseSchema,
  ModelSummary,
  ModelSummarySchema,
  SessionResponseSchema,
  SolveRequest,
  SolveRequestSchema,
  SolveResponse,
  SolveResponseSchema,
  ValidateResponseSchema,
} from "./schemas";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly diagnostics: { code: string; message: string }[],
  ) {
    super(diagnostics.map((d) => `${d.code}: ${d.message}`).join("; ") || `HTTP ${status}`);
  }
}

export class EngineClient {
  constructor(
    private readonly base: string,
    private readonly fetchFn: typeof fetch = fetch,
  ) {}

  private async request(path: string, init?: RequestInit): Promise<unknown> {
    const response = await this.fetchFn(`${this.base}${path}`, {
      headers: { "content-type": "application/json" },
      ...init,
    });
    const body: unknown = await response.json().catch(() => ({}));
    if (!response.ok) {
      const parsed = ErrorBodySchema.safeParse(body);
      const diagnostics = parsed.success && parsed.data.diagnostics
        ? parsed.data.diagnostics.map((d) => ({ code: d.code, message: d.message }))
        : [];
      throw new ApiError(response.status, diagnostics);
    }
    return body;
  }

  async model(): Promise<ModelSummary> {
    return ModelSummarySchema.parse(await this.request("/model"));
  }

  async solve(request: SolveRequest): Promise<SolveResponse> {
    const body = SolveRequestSchema.parse(request);
    return SolveResponseSchema.parse(
      await this.request("/solve", { method: "POST", body: JSON.stringify(body) }),
    );
  }

  async explanation(solutionId: string): Promise<ExplanationResponse> {
    return ExplanationResponseSchema.parse(
      await this.request(`/explanations/${solutionId}`),
    );
  }

  async addKnowHow(
    document: string,
    binding: Record<string, string>,
    classname: string,
  ): Promise<KnowHowResponse> {
    const body = KnowHowRequestSchema.parse({ document, binding, classname });
    return KnowHowResponseSchema.parse(
      await this.request("/knowhow", { method: "POST", body: JSON.stringify(body) }),
    );
  }

  async validate(probe?: string) {
    return ValidateResponseSchema.parse(
      await this.request("/validate", {
        method: "POST",
        body: JSON.stringify(probe ? { probe } : {}),
      }),
    );
  }

  async session() {
    return SessionResponseSchema.parse(await this.request("/session"));
  }
}
