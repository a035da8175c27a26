/**
 * Typed client for the analysis service. Every payload shape here mirrors
 * the service's canonical JSON exactly; the client adds no computation.
 */

export interface SchemaField {
  name: string;
  kind: "numeric" | "categorical";
}

export interface SessionInfo {
  dataset: {
    id: string;
    version: number;
    n_points: number;
    schema: SchemaField[];
    derived: string[];
  } | null;
  models: { slot: string; task: { type: string }; remote: boolean; display_name: string }[];
  comparison_mode: boolean;
  settings: { cost_ratio: number; norm: string; bin_count: number };
}

export type CellValue = number | string | null;

export interface PointRecord {
  id: number;
  origin: string;
  values: Record<string, CellValue>;
  derived?: Record<string, number>;
}

export interface PointsPage {
  version: number;
  total: number;
  offset: number;
  points: PointRecord[];
}

export interface PredictionRow {
  id: number | null;
  output: number | number[];
  delta: number | number[] | null;
  direction: "up" | "down" | "flat" | null;
}

export interface PredictResponse {
  version: number;
  model: string;
  predictions: PredictionRow[];
}

export interface FeatureStats {
  kind: "numeric" | "categorical";
  count: number;
  missing: number;
  distinct: number;
  non_uniformity: number;
  display_mode: "histogram" | "cdf";
  min?: number;
  max?: number;
  mean?: number;
  std?: number;
  zeros?: number;
  histogram?: { edges: number[]; counts: number[] };
  value_counts?: Record<string, number>;
  most_frequent?: string;
}

export interface StatsResponse {
  version: number;
  features: Record<string, FeatureStats>;
  order?: string[];
}

export interface BinsResponse {
  version: number;
  x: { feature: string; edges?: number[] } | null;
  y: { feature: string; edges?: number[] } | null;
  color: { feature: string } | null;
  points: { id: number; x: CellValue; y: CellValue; color: CellValue }[];
}

export interface CounterfactualDelta {
  feature: string;
  anchor: CellValue;
  match: CellValue;
  distance: number;
  differs: boolean;
}

export interface CounterfactualResponse {
  version: number;
  model: string;
  norm: string;
  anchor_id: number;
  found: boolean;
  match_id: number | null;
  distance: number | null;
  deltas: CounterfactualDelta[] | null;
}

export interface PdpResponse {
  version: number;
  feature: string;
  kind: "numeric" | "categorical";
  xs: CellValue[];
  series: { model: string; class: string | null; ys: number[] }[];
  original_value: CellValue;
  thresholds: Record<string, number>;
}

export interface SliceRow {
  slice_key: string;
  count: number;
  threshold: number;
  confusion: { tp: number; fp: number; tn: number; fn: number };
  accuracy: number;
  fp_pct: number;
  fn_pct: number;
}

export interface PerformanceResponse {
  version: number;
  task: string;
  cost_ratio?: number;
  models: {
    model: string;
    threshold?: number | null;
    slices: SliceRow[];
    roc?: { points: [number, number, number][]; auc: number };
  }[];
}

export interface FairnessResponse {
  version: number;
  strategy: string;
  cost_ratio: number;
  epsilon: number;
  models: {
    model: string;
    slices: SliceRow[];
    achieved_disparity: number | null;
    parity_met: boolean | null;
  }[];
}

export interface EditResponse {
  version: number;
  point: PointRecord;
}

export class ApiError extends Error {
  constructor(
    public status: number,
    public code: string,
    message: string,
  ) {
    super(message);
  }
}

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private mutationChain: Promise<unknown> = Promise.resolve();

  constructor(
    private baseUrl: string = "",
    private fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const text = await resp.text();
    let body: unknown = null;
    try {
      body = text ? JSON.parse(text) : null;
    } catch {
      throw new ApiError(resp.status, "bad_json", `unparseable response from ${path}`);
    }
    if (!resp.ok) {
      const err = body as { code?: string; message?: string } | null;
      throw new ApiError(resp.status, err?.code ?? "error", err?.message ?? resp.statusText);
    }
    return body as T;
  }

  private get<T>(path: string, params?: Record<string, string | number | undefined>): Promise<T> {
    const query = params
      ? "?" +
        Object.entries(params)
          .filter(([, v]) => v !== undefined)
          .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
          .join("&")
      : "";
    return this.request<T>(path + query);
  }

  private post<T>(path: string, body: unknown, method = "POST"): Promise<T> {
    return this.request<T>(path, {
      method,
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
  }

  /** Mutations run one at a time; reads may overlap freely. */
  private mutate<T>(run: () => Promise<T>): Promise<T> {
    const next = this.mutationChain.then(run, run);
    this.mutationChain = next.catch(() => undefined);
    return next;
  }

  session(): Promise<SessionInfo> {
    return this.get("/session");
  }

  points(datasetId: string, offset = 0, limit = 200): Promise<PointsPage> {
    return this.get(`/datasets/${datasetId}/points`, { offset, limit });
  }

  stats(datasetId: string, sort?: string): Promise<StatsResponse> {
    return this.get(`/datasets/${datasetId}/stats`, { sort });
  }

  editPoint(datasetId: string, pointId: number, changes: Record<string, CellValue>): Promise<EditResponse> {
    return this.mutate(() =>
      this.post<EditResponse>(`/datasets/${datasetId}/points/${pointId}`, { changes }, "PATCH"),
    );
  }

  duplicatePoint(datasetId: string, pointId: number): Promise<EditResponse> {
    return this.mutate(() =>
      this.post<EditResponse>(`/datasets/${datasetId}/points/${pointId}/duplicate`, {}),
    );
  }

  deletePoint(datasetId: string, pointId: number): Promise<{ version: number }> {
    return this.mutate(() =>
      this.request<{ version: number }>(`/datasets/${datasetId}/points/${pointId}`, {
        method: "DELETE",
      }),
    );
  }

  predictByIds(model: string, pointIds: number[]): Promise<PredictResponse> {
    return this.post("/predict", { model, point_ids: pointIds });
  }

  predictInline(model: string, points: Record<string, CellValue>[]): Promise<PredictResponse> {
    return this.post("/predict", { model, points });
  }

  bins(params: {
    x?: string;
    y?: string;
    bins?: number;
    color?: string;
    label?: string;
    positive?: string;
  }): Promise<BinsResponse> {
    return this.get("/analysis/bins", params);
  }

  counterfactual(point: number, norm?: string, model?: string): Promise<CounterfactualResponse> {
    return this.get("/analysis/counterfactual", { point, norm, model });
  }

  pdp(params: {
    feature: string;
    point?: number;
    global?: string;
    range?: string;
    num_points?: number;
  }): Promise<PdpResponse> {
    return this.get("/analysis/pdp", params);
  }

  performance(params: {
    label: string;
    positive?: string;
    slice_by?: string;
    cost_ratio?: number;
    threshold?: number;
    thresholds?: string;
  }): Promise<PerformanceResponse> {
    return this.get("/analysis/performance", params);
  }

  fairness(body: {
    strategy: string;
    label: string;
    positive?: string;
    slice_by?: string;
    cost_ratio?: number;
    epsilon?: number;
  }): Promise<FairnessResponse> {
    return this.post("/analysis/fairness", body);
  }
}
