import type { FrequencyChartPayload } from "./types.js";

export interface ChartBar {
  cluster: number;
  /** The payload value, untouched. */
  frequency: number;
  /** Presentation width in pixels: frequency × barMaxWidth. */
  width: number;
}

export interface ChartRow {
  code: string;
  globalFrequency: number;
  bars: ChartBar[];
}

export interface ChartGeometry {
  barMaxWidth: number;
  barHeight: number;
  rowGap: number;
  labelWidth: number;
}

export const CHART_GEOMETRY: ChartGeometry = {
  barMaxWidth: 320,
  barHeight: 10,
  rowGap: 6,
  labelWidth: 70,
};

export const CLUSTER_COLORS = [
  "#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1",
  "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#bab0ac",
];

export function clusterColor(cluster: number): string {
  return CLUSTER_COLORS[cluster % CLUSTER_COLORS.length];
}

/**
 * Turn the chart payload into horizontal rows — one per feature, in payload
 * order, with one bar per cluster. A zero frequency still yields a bar
 * (width 0); nothing is recomputed, only scaled for display.
 */
export function buildFrequencyChart(
  payload: FrequencyChartPayload,
  geometry: ChartGeometry = CHART_GEOMETRY,
): ChartRow[] {
  return payload.features.map((code, index) => {
    const perCluster = payload.per_cluster[code];
    if (perCluster === undefined) {
      throw new Error(`chart payload has no per-cluster row for code ${code}`);
    }
    return {
      code,
      globalFrequency: payload.global_frequency[index],
      bars: perCluster.map((frequency, cluster) => ({
        cluster,
        frequency,
        width: frequency * geometry.barMaxWidth,
      })),
    };
  });
}

function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/**
 * Render the chart as a standalone SVG string. Every bar carries the payload
 * value verbatim in data-frequency so the DOM stays byte-traceable to the
 * API response.
 */
export function renderFrequencyChart(
  payload: FrequencyChartPayload,
  geometry: ChartGeometry = CHART_GEOMETRY,
): string {
  const rows = buildFrequencyChart(payload, geometry);
  const k = rows.length > 0 ? rows[0].bars.length : 0;
  const rowHeight = Math.max(1, k) * geometry.barHeight + geometry.rowGap;
  const width = geometry.labelWidth + geometry.barMaxWidth + 10;
  const height = rows.length * rowHeight + geometry.rowGap;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" class="frequency-chart" ` +
      `width="${width}" height="${height}" data-rows="${rows.length}" data-k="${k}">`,
  );
  rows.forEach((row, rowIndex) => {
    const top = geometry.rowGap + rowIndex * rowHeight;
    parts.push(`<g class="chart-row" data-code="${escapeXml(row.code)}">`);
    parts.push(
      `<text x="${geometry.labelWidth - 6}" y="${top + (rowHeight - geometry.rowGap) / 2}" ` +
        `text-anchor="end" dominant-baseline="middle" class="chart-label">` +
        `${escapeXml(row.code)}</text>`,
    );
    row.bars.forEach((bar) => {
      const y = top + bar.cluster * geometry.barHeight;
      parts.push(
        `<rect class="chart-bar" x="${geometry.labelWidth}" y="${y}" ` +
          `width="${bar.width}" height="${geometry.barHeight - 1}" ` +
          `fill="${clusterColor(bar.cluster)}" data-cluster="${bar.cluster}" ` +
          `data-frequency="${bar.frequency}"></rect>`,
      );
    });
    parts.push("</g>");
  });
  parts.push("</svg>");
  return parts.join("");
}
