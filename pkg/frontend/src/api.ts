/**
 * Typed client for the modelprobe session API.
 *
 * The client performs no arithmetic on explanation values: everything it
 * returns is the parsed server document, and callers that need the raw bytes
 * (for display fidelity checks) can wrap `fetchFn`.
 */

export type FeatureKind = "continuous" | "count" | "categorical";

export interface FeatureView {
  name: string;
  kind: FeatureKind;
  lower?: number;
  upper?: number;
  categories?: string[];
}

export interface PredictionView {
  score?: number;
  probabilities?: number[];
  classes?: string[];
  predicted_class?: string;
}

export interface SessionView {
  id: string;
  schema: FeatureView[];
  point: number[];
  named: Record<string, number | string>;
  prediction: PredictionView;
  classes: string[] | null;
  has_dataset: boolean;
  created_at: string;
  updated_at: string;
  n_events: number;
}

export interface EventView {
  seq: number;
  kind: "whatif" | "counterfactual" | "attribution" | "fidelity" | "note";
  request: unknown;
  response: unknown;
  timestamp: string;
}

export interface WhatIfResponse {
  old: PredictionView;
  new: PredictionView;
  delta: number | null;
  point: number[];
  named: Record<string, number | string>;
  seq: number;
}

export interface SchemeDoc {
  kind: string;
  n_samples?: number;
  n_permutations?: number;
  kernel_width?: number | null;
}

export interface BaselineRequest {
  strategy: "zero" | "reference" | "dataset_median" | "dataset_mean";
  reference?: Array<number | string>;
}

export interface ExplanationDoc {
  scheme: SchemeDoc;
  baseline: { strategy: string; values: number[] | null };
  anchor: number[];
  weights: number[];
  intercept: number;
  diagnostics: Record<string, unknown>;
  engine_version: string;
  seed: number | null;
  seq?: number;
}

export interface ChangedFeature {
  feature: string;
  from: number | string;
  to: number | string;
}

export interface CounterfactualDoc {
  counterfactual: number[];
  score: number;
  distance: number;
  converged: boolean;
  lambda_trace: Array<[number, number]>;
  changed_features: ChangedFeature[];
  statement: string;
  config_echo: Record<string, unknown>;
  seed: number | null;
  seq?: number;
}

export interface ProfileDoc {
  radii: number[];
  agreement: number[];
  threshold: number;
  validity_radius: number | null;
  n_samples: number;
  seed: number;
}

export interface FidelityDoc {
  profile: ProfileDoc;
  analogies: {
    features: Array<{
      name: string;
      classification: "positive" | "negative" | "neutral";
      effect_correlation: number;
      n_effective: number;
    }>;
    tau_plus: number;
    tau_minus: number;
    min_samples: number;
    seed: number;
  } | null;
  config_echo: Record<string, unknown>;
  engine_version: string;
  seed: number;
  seq?: number;
}

export interface CounterfactualRequest {
  target: { score?: number; class?: string; tolerance?: number };
  distance?: { kind?: string; weights?: number[]; locked?: string[] };
  search?: Record<string, unknown>;
  seed: number;
}

export interface AttributionRequest {
  scheme: SchemeDoc;
  baseline?: BaselineRequest;
  class_index?: number;
  seed?: number;
}

export interface FidelityRequest {
  explanation: { event_seq: number } | AttributionRequest;
  radii: number[];
  threshold?: number;
  n_samples?: number;
  class_index?: number;
  seed?: number;
}

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
    readonly locus: string | null = null,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

const sleep = (ms: number) => new Promise((resolve) => setTimeout(resolve, ms));

export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchFn: FetchLike = (input, init) => fetch(input, init),
    readonly pollIntervalMs: number = 1000,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(this.baseUrl + path, {
      method,
      headers: body === undefined ? undefined : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    let doc: unknown = null;
    try {
      doc = text ? JSON.parse(text) : null;
    } catch {
      throw new ApiError(response.status, "bad_payload", `non-JSON response: ${text}`);
    }
    if (!response.ok && response.status !== 202) {
      const err = (doc as { error?: { code?: string; message?: string; locus?: string | null } })?.error;
      throw new ApiError(
        response.status,
        err?.code ?? "http_error",
        err?.message ?? `HTTP ${response.status}`,
        err?.locus ?? null,
      );
    }
    if (response.status === 202) {
      const token = (doc as { job: string }).job;
      return this.pollJob<T>(token);
    }
    return doc as T;
  }

  private async pollJob<T>(token: string): Promise<T> {
    // 1 s polling keeps long searches from blocking the page
    for (;;) {
      await sleep(this.pollIntervalMs);
      const status = await this.request<{ status: string; result: T; error: { code: string; message: string; locus: string | null } | null }>(
        "GET",
        `/jobs/${token}`,
      );
      if (status.status === "done") return status.result;
      if (status.status === "failed") {
        const err = status.error;
        throw new ApiError(422, err?.code ?? "job_failed", err?.message ?? "job failed", err?.locus ?? null);
      }
    }
  }

  health(): Promise<{ status: string; engine_version: string }> {
    return this.request("GET", "/healthz");
  }

  createSession(model: unknown, point: Array<number | string> | Record<string, number | string>, datasetCsv?: string): Promise<SessionView> {
    const payload: Record<string, unknown> = { model, point };
    if (datasetCsv !== undefined) payload.dataset = { csv: datasetCsv };
    return this.request("POST", "/sessions", payload);
  }

  getSession(id: string): Promise<SessionView> {
    return this.request("GET", `/sessions/${id}`);
  }

  history(id: string): Promise<EventView[]> {
    return this.request<{ events: EventView[] }>("GET", `/sessions/${id}/history`).then(
      (doc) => doc.events,
    );
  }

  whatif(id: string, edits: Record<string, number | string>): Promise<WhatIfResponse> {
    return this.request("POST", `/sessions/${id}/whatif`, { edits });
  }

  counterfactual(id: string, req: CounterfactualRequest): Promise<CounterfactualDoc> {
    return this.request("POST", `/sessions/${id}/counterfactual`, req);
  }

  attribution(id: string, req: AttributionRequest): Promise<ExplanationDoc> {
    return this.request("POST", `/sessions/${id}/attribution`, req);
  }

  fidelity(id: string, req: FidelityRequest): Promise<FidelityDoc> {
    return this.request("POST", `/sessions/${id}/fidelity`, req);
  }
}
