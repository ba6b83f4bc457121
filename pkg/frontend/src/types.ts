/** Payload shapes of the clustering service. Mirrors the JSON exactly. */

export interface TopCode {
  code: string;
  frequency: number;
}

export interface DatasetSummary {
  dataset_id: string;
  n_rows: number;
  n_cols: number;
  top_codes: TopCode[];
}

export type RunStatus = "queued" | "running" | "done" | "failed";

export interface ApiErrorBody {
  code: string;
  message: string;
}

export interface RunHandle {
  run_id: string;
  dataset_id: string;
  parent_run: string | null;
  cluster_index: number | null;
  status: RunStatus;
  created_at: string;
  k: number;
  n_rows: number;
  error: ApiErrorBody | null;
  sizes?: number[];
  em?: { iterations: number; converged: boolean };
}

export interface FrequencyChartPayload {
  features: string[];
  global_frequency: number[];
  per_cluster: Record<string, number[]>;
}

export interface HeatmapBlockPayload {
  cluster: number;
  row_ids: string[];
  cells: number[][];
}

export interface HeatmapPayload {
  features: string[];
  blocks: HeatmapBlockPayload[];
}

export interface RelevanceItem {
  code: string;
  score: number;
  frequency: number;
}

export interface RelevanceClusterPayload {
  cluster: number;
  items: RelevanceItem[];
}

export interface RelevancePayload {
  lambda: number;
  clusters: RelevanceClusterPayload[];
}

export interface Report {
  n_rows: number;
  n_components: number;
  sizes: number[];
  frequency_chart: FrequencyChartPayload;
  heatmap: HeatmapPayload;
  relevance: RelevancePayload;
}

export interface StabilityResult {
  dataset_id: string;
  k: number;
  ari: number;
}

export interface EmOptions {
  omega_tol?: number;
  max_iters?: number;
  prob_floor?: number;
}

export interface FeatureFilter {
  include?: string[];
  exclude?: string[];
}

export interface ClusterRequest {
  k: number;
  min_codes?: number;
  lambda?: number;
  em?: EmOptions;
  feature_filter?: FeatureFilter;
}

export interface SubclusterRequest extends ClusterRequest {
  cluster_index: number;
}

export interface StabilityRequest {
  k: number;
  overlap?: number;
  seed?: number;
  em?: EmOptions;
}

export interface ReportOptions {
  top_chart?: number;
  top_heatmap?: number;
  top_relevance?: number;
  lambda?: number;
}
