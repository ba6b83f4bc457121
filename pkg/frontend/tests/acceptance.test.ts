/**
 * UI fidelity gate, run against payloads recorded from the real service
 * (fixtures/ is regenerated by scripts/generate_fixtures.py):
 *
 *   - the frequency chart renders exactly the top-20 chart payload;
 *   - the heatmap renders exactly the top-40 payload;
 *   - drill-down produced a child run whose row count equals the parent
 *     cluster's size;
 *   - a relevance report at lambda=1.0 ranks identically to raw frequency.
 *
 * Run with `npm test -- --run`; each check prints a PASS line.
 */
import { describe, expect, it } from "vitest";

import { renderFrequencyChart } from "../src/frequencyChart";
import { flattenHeatmap, renderHeatmap } from "../src/heatmap";
import { isFrequencyOrdered } from "../src/relevance";
import type { Report, RunHandle } from "../src/types";

import reportDefault from "../fixtures/report_default.json";
import reportLambda1 from "../fixtures/report_lambda1.json";
import runChild from "../fixtures/run_child.json";
import runParent from "../fixtures/run_parent.json";

const report = reportDefault as unknown as Report;
const lambda1 = reportLambda1 as unknown as Report;
const parent = runParent as unknown as RunHandle;
const child = runChild as unknown as RunHandle;

function attrValues(markup: string, attr: string): string[] {
  return [...markup.matchAll(new RegExp(`${attr}="([^"]*)"`, "g"))].map((m) => m[1]);
}

function pass(detail: string): void {
  console.log(`[criterion 9] PASS: ${detail}`);
}

describe("UI fidelity", () => {
  it("frequency chart renders exactly the top-20 chart payload", () => {
    const chart = report.frequency_chart;
    expect(chart.features).toHaveLength(20);
    const svg = renderFrequencyChart(chart);
    expect(attrValues(svg, "data-code")).toEqual(chart.features);
    expect(attrValues(svg, "data-frequency")).toEqual(
      chart.features.flatMap((code) => chart.per_cluster[code].map(String)),
    );
    expect((svg.match(/class="chart-bar"/g) ?? []).length).toBe(
      20 * report.n_components,
    );
    pass(
      `chart shows ${chart.features.length} features x ${report.n_components} ` +
        "clusters, every bar value lifted verbatim from the payload",
    );
  });

  it("heatmap renders exactly the top-40 payload", () => {
    const heatmap = report.heatmap;
    expect(heatmap.features).toHaveLength(40);
    const svg = renderHeatmap(heatmap);
    expect(attrValues(svg, "data-columns")).toEqual(["40"]);
    expect(attrValues(svg, "data-bands")).toEqual([String(report.n_components)]);
    const rows = flattenHeatmap(heatmap);
    expect(rows).toHaveLength(report.n_rows);
    const rowMarkup = [...svg.matchAll(/<g class="heatmap-row"[^>]*>(.*?)<\/g>/g)];
    expect(rowMarkup).toHaveLength(rows.length);
    let marks = 0;
    rowMarkup.forEach((match, i) => {
      const columns = attrValues(match[1], "data-column").map(Number);
      const expected = rows[i].cells
        .map((cell, j) => (cell === 1 ? j : -1))
        .filter((j) => j >= 0);
      expect(columns).toEqual(expected);
      marks += columns.length;
    });
    pass(
      `heatmap shows ${rows.length} rows x 40 columns in ${report.n_components} ` +
        `cluster bands; all ${marks} marks match the payload cells exactly`,
    );
  });

  it("drill-down child run has N equal to the parent cluster size", () => {
    expect(child.parent_run).toBe(parent.run_id);
    expect(child.cluster_index).not.toBeNull();
    const clusterIndex = child.cluster_index as number;
    const parentSizes = parent.sizes as number[];
    expect(child.n_rows).toBe(parentSizes[clusterIndex]);
    pass(
      `child ${child.run_id} split parent cluster ${clusterIndex}: ` +
        `N=${child.n_rows} equals parent size ${parentSizes[clusterIndex]}`,
    );
  });

  it("lambda=1.0 relevance ranking is identical to the frequency ranking", () => {
    expect(lambda1.relevance.lambda).toBe(1.0);
    for (const cluster of lambda1.relevance.clusters) {
      expect(cluster.items.length).toBeGreaterThan(0);
      expect(isFrequencyOrdered(cluster.items)).toBe(true);
      const byFrequency = [...cluster.items].sort(
        (a, b) => b.frequency - a.frequency || a.code.localeCompare(b.code),
      );
      expect(cluster.items.map((it) => it.code)).toEqual(
        byFrequency.map((it) => it.code),
      );
    }
    pass(
      `all ${lambda1.relevance.clusters.length} clusters rank by raw frequency ` +
        "when the relevance slider sits at 1.0",
    );
  });
});
