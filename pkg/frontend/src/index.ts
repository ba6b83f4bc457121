export { ApiClient, ApiRequestError } from "./api.js";
export type { FetchLike } from "./api.js";
export { pollRun } from "./poll.js";
export type { PollOptions } from "./poll.js";
export {
  DEFAULT_UI_OPTIONS,
  ExplorationSession,
} from "./session.js";
export type { BreadcrumbEntry, RunNode, UiOptions } from "./session.js";
export {
  CHART_GEOMETRY,
  buildFrequencyChart,
  clusterColor,
  renderFrequencyChart,
} from "./frequencyChart.js";
export type { ChartBar, ChartGeometry, ChartRow } from "./frequencyChart.js";
export {
  HEATMAP_GEOMETRY,
  clusterBands,
  computeRowWindow,
  flattenHeatmap,
  renderHeatmap,
} from "./heatmap.js";
export type { ClusterBand, HeatmapGeometry, HeatmapRow, RowWindow } from "./heatmap.js";
export {
  DEFAULT_LAMBDA,
  buildRelevanceTables,
  clampLambda,
  isFrequencyOrdered,
  renderRelevanceTables,
} from "./relevance.js";
export type { RelevanceTable, RelevanceTableRow } from "./relevance.js";
export { ExplorerApp, initExplorer } from "./app.js";
export type * from "./types.js";
