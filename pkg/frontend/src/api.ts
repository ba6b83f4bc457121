import type {
  ApiErrorBody,
  ClusterRequest,
  DatasetSummary,
  Report,
  ReportOptions,
  RunHandle,
  StabilityRequest,
  StabilityResult,
  SubclusterRequest,
} from "./types.js";

/** A 4xx/5xx response decoded from the service's {code, message} envelope. */
export class ApiRequestError extends Error {
  readonly status: number;
  readonly code: string;

  constructor(status: number, body: ApiErrorBody) {
    super(body.message);
    this.name = "ApiRequestError";
    this.status = status;
    this.code = body.code;
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over the clustering service; no model numerics here. */
export class ApiClient {
  private readonly baseUrl: string;
  private readonly fetchFn: FetchLike;

  constructor(baseUrl = "", fetchFn: FetchLike = (...args) => fetch(...args)) {
    this.baseUrl = baseUrl.replace(/\/$/, "");
    this.fetchFn = fetchFn;
  }

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    let body: unknown;
    try {
      body = await response.json();
    } catch {
      body = { code: "bad_response", message: `non-JSON response (${response.status})` };
    }
    if (!response.ok) {
      throw new ApiRequestError(response.status, body as ApiErrorBody);
    }
    return body as T;
  }

  private postJson<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  uploadDataset(recordsText: string, minCodes?: number): Promise<DatasetSummary> {
    const query = minCodes === undefined ? "" : `?min_codes=${minCodes}`;
    return this.request<DatasetSummary>(`/datasets${query}`, {
      method: "POST",
      headers: { "content-type": "text/plain" },
      body: recordsText,
    });
  }

  getDataset(datasetId: string): Promise<DatasetSummary> {
    return this.request<DatasetSummary>(`/datasets/${datasetId}`);
  }

  startCluster(datasetId: string, req: ClusterRequest): Promise<RunHandle> {
    return this.postJson<RunHandle>(`/datasets/${datasetId}/cluster`, req);
  }

  startSubcluster(runId: string, req: SubclusterRequest): Promise<RunHandle> {
    return this.postJson<RunHandle>(`/runs/${runId}/subcluster`, req);
  }

  getRun(runId: string): Promise<RunHandle> {
    return this.request<RunHandle>(`/runs/${runId}`);
  }

  getReport(runId: string, options: ReportOptions = {}): Promise<Report> {
    const params = new URLSearchParams();
    if (options.top_chart !== undefined) params.set("top_chart", String(options.top_chart));
    if (options.top_heatmap !== undefined) {
      params.set("top_heatmap", String(options.top_heatmap));
    }
    if (options.top_relevance !== undefined) {
      params.set("top_relevance", String(options.top_relevance));
    }
    if (options.lambda !== undefined) params.set("lambda", String(options.lambda));
    const query = params.toString();
    return this.request<Report>(`/runs/${runId}/report${query ? `?${query}` : ""}`);
  }

  checkStability(datasetId: string, req: StabilityRequest): Promise<StabilityResult> {
    return this.postJson<StabilityResult>(`/datasets/${datasetId}/stability`, req);
  }
}
