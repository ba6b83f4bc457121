import type { RelevanceItem, RelevancePayload } from "./types.js";

export interface RelevanceTableRow {
  rank: number;
  code: string;
  score: number;
  frequency: number;
}

export interface RelevanceTable {
  cluster: number;
  rows: RelevanceTableRow[];
}

export const DEFAULT_LAMBDA = 0.6;

/** Clamp a slider/input value into [0, 1]; non-numbers fall to the default. */
export function clampLambda(value: number): number {
  if (Number.isNaN(value)) {
    return DEFAULT_LAMBDA;
  }
  return Math.min(1, Math.max(0, value));
}

/**
 * Payload passthrough: the server already ordered each cluster's items by
 * score, so the table only numbers them. No re-scoring happens client-side.
 */
export function buildRelevanceTables(payload: RelevancePayload): RelevanceTable[] {
  return payload.clusters.map((cluster) => ({
    cluster: cluster.cluster,
    rows: cluster.items.map((item, index) => ({
      rank: index + 1,
      code: item.code,
      score: item.score,
      frequency: item.frequency,
    })),
  }));
}

/** True when the items are already in descending-frequency order (λ=1 look). */
export function isFrequencyOrdered(items: RelevanceItem[]): boolean {
  for (let i = 1; i < items.length; i += 1) {
    if (items[i].frequency > items[i - 1].frequency) {
      return false;
    }
  }
  return true;
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

/** Render one table per cluster; data-score carries the payload value verbatim. */
export function renderRelevanceTables(payload: RelevancePayload): string {
  const tables = buildRelevanceTables(payload);
  const parts: string[] = [`<div class="relevance" data-lambda="${payload.lambda}">`];
  for (const table of tables) {
    parts.push(`<table class="relevance-table" data-cluster="${table.cluster}">`);
    parts.push(
      `<caption>cluster ${table.cluster}</caption>` +
        "<thead><tr><th>#</th><th>code</th><th>score</th><th>frequency</th></tr></thead><tbody>",
    );
    for (const row of table.rows) {
      parts.push(
        `<tr data-code="${escapeHtml(row.code)}" data-score="${row.score}" ` +
          `data-frequency="${row.frequency}"><td>${row.rank}</td>` +
          `<td>${escapeHtml(row.code)}</td><td>${row.score.toFixed(4)}</td>` +
          `<td>${row.frequency.toFixed(4)}</td></tr>`,
      );
    }
    parts.push("</tbody></table>");
  }
  parts.push("</div>");
  return parts.join("");
}
