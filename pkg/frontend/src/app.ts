import { ApiClient, ApiRequestError } from "./api.js";
import { renderFrequencyChart } from "./frequencyChart.js";
import { HEATMAP_GEOMETRY, computeRowWindow, flattenHeatmap, renderHeatmap } from "./heatmap.js";
import { pollRun } from "./poll.js";
import { clampLambda, renderRelevanceTables } from "./relevance.js";
import { ExplorationSession } from "./session.js";
import type { RunNode } from "./session.js";
import type { Report, RunHandle } from "./types.js";

const TEMPLATE = `
<div class="explorer">
  <header>
    <h1>binmix explorer</h1>
    <div class="banner" id="banner" hidden></div>
  </header>
  <section class="upload-pane">
    <textarea id="records" rows="6"
      placeholder="one record per line:  row_id;code,code,code"></textarea>
    <div class="controls">
      <label>min codes <input id="min-codes" type="number" value="3" min="0"></label>
      <button id="upload">upload</button>
      <span id="dataset-info"></span>
    </div>
    <div class="controls">
      <label>k <input id="k" type="number" value="5" min="1"></label>
      <label>exclude codes <input id="exclude" type="text" placeholder="428,401"></label>
      <button id="cluster" disabled>cluster</button>
      <button id="stability" disabled>stability</button>
      <span id="stability-result"></span>
    </div>
  </section>
  <section class="run-pane" id="run-pane" hidden>
    <nav id="breadcrumb"></nav>
    <div class="controls">
      <label>&lambda; <input id="lambda" type="range" min="0" max="1" step="0.05"></label>
      <span id="lambda-value"></span>
      <label>chart top <input id="top-chart" type="number" min="1"></label>
      <label>heatmap top <input id="top-heatmap" type="number" min="1"></label>
    </div>
    <div id="run-status"></div>
    <div id="drill-actions"></div>
    <div id="chart"></div>
    <div id="heatmap-viewport" class="heatmap-viewport"></div>
    <div id="relevance"></div>
  </section>
  <aside id="run-tree"></aside>
</div>`;

function requireElement<T extends Element>(root: ParentNode, selector: string): T {
  const el = root.querySelector<T>(selector);
  if (el === null) {
    throw new Error(`missing element ${selector}`);
  }
  return el;
}

export class ExplorerApp {
  private readonly api: ApiClient;
  private readonly session = new ExplorationSession();
  private readonly root: HTMLElement;

  constructor(root: HTMLElement, api: ApiClient) {
    this.root = root;
    this.api = api;
    root.innerHTML = TEMPLATE;
    this.wire();
    this.syncOptionInputs();
  }

  private el<T extends Element>(selector: string): T {
    return requireElement<T>(this.root, selector);
  }

  private banner(message: string | null): void {
    const banner = this.el<HTMLElement>("#banner");
    banner.hidden = message === null;
    banner.textContent = message ?? "";
  }

  private async guarded(action: () => Promise<void>): Promise<void> {
    try {
      this.banner(null);
      await action();
    } catch (err) {
      if (err instanceof ApiRequestError) {
        this.banner(`${err.code}: ${err.message}`);
      } else {
        this.banner(err instanceof Error ? err.message : String(err));
      }
    }
  }

  private wire(): void {
    this.el<HTMLButtonElement>("#upload").addEventListener("click", () => {
      void this.guarded(() => this.upload());
    });
    this.el<HTMLButtonElement>("#cluster").addEventListener("click", () => {
      void this.guarded(() => this.cluster());
    });
    this.el<HTMLButtonElement>("#stability").addEventListener("click", () => {
      void this.guarded(() => this.stability());
    });
    this.el<HTMLInputElement>("#lambda").addEventListener("change", () => {
      const input = this.el<HTMLInputElement>("#lambda");
      this.session.uiOptions.lambda = clampLambda(Number(input.value));
      this.syncOptionInputs();
      void this.guarded(() => this.refreshReport());
    });
    this.el<HTMLInputElement>("#top-chart").addEventListener("change", () => {
      const value = Number(this.el<HTMLInputElement>("#top-chart").value);
      this.session.uiOptions.topChart = Math.max(1, Math.floor(value) || 1);
      void this.guarded(() => this.refreshReport());
    });
    this.el<HTMLInputElement>("#top-heatmap").addEventListener("change", () => {
      const value = Number(this.el<HTMLInputElement>("#top-heatmap").value);
      this.session.uiOptions.topHeatmap = Math.max(1, Math.floor(value) || 1);
      void this.guarded(() => this.refreshReport());
    });
  }

  private syncOptionInputs(): void {
    const options = this.session.uiOptions;
    this.el<HTMLInputElement>("#lambda").value = String(options.lambda);
    this.el<HTMLElement>("#lambda-value").textContent = options.lambda.toFixed(2);
    this.el<HTMLInputElement>("#top-chart").value = String(options.topChart);
    this.el<HTMLInputElement>("#top-heatmap").value = String(options.topHeatmap);
  }

  private async upload(): Promise<void> {
    const text = this.el<HTMLTextAreaElement>("#records").value;
    const minCodes = Number(this.el<HTMLInputElement>("#min-codes").value);
    const summary = await this.api.uploadDataset(text, minCodes);
    this.session.setDataset(summary.dataset_id);
    this.el<HTMLElement>("#dataset-info").textContent =
      `${summary.dataset_id}: ${summary.n_rows} rows × ${summary.n_cols} codes`;
    this.el<HTMLButtonElement>("#cluster").disabled = false;
    this.el<HTMLButtonElement>("#stability").disabled = false;
    this.renderTree();
  }

  private currentExcludes(): string[] | undefined {
    const raw = this.el<HTMLInputElement>("#exclude").value.trim();
    if (raw === "") {
      return undefined;
    }
    return raw.split(",").map((code) => code.trim()).filter((code) => code !== "");
  }

  private async cluster(): Promise<void> {
    const datasetId = this.session.datasetId;
    if (datasetId === null) {
      return;
    }
    const k = Number(this.el<HTMLInputElement>("#k").value);
    const exclude = this.currentExcludes();
    const handle = await this.api.startCluster(datasetId, {
      k,
      lambda: this.session.uiOptions.lambda,
      ...(exclude === undefined ? {} : { feature_filter: { exclude } }),
    });
    this.session.addRun(handle);
    await this.trackRun(handle);
  }

  async drillDown(parentRunId: string, clusterIndex: number, k: number): Promise<void> {
    const handle = await this.api.startSubcluster(parentRunId, {
      cluster_index: clusterIndex,
      k,
      lambda: this.session.uiOptions.lambda,
    });
    this.session.addRun(handle);
    await this.trackRun(handle);
  }

  private async trackRun(handle: RunHandle): Promise<void> {
    this.renderTree();
    this.renderRunStatus(handle);
    const finished = await pollRun(this.api, handle.run_id, {
      onUpdate: (update) => {
        // updateRun returning false means the session moved on; drop it.
        if (this.session.updateRun(update)) {
          this.renderRunStatus(update);
        }
      },
    });
    if (!this.session.updateRun(finished)) {
      return;
    }
    this.renderTree();
    await this.refreshReport();
  }

  private async refreshReport(): Promise<void> {
    const active = this.session.activeRun;
    if (active === undefined || active.handle.status !== "done") {
      return;
    }
    const options = this.session.uiOptions;
    const runId = active.handle.run_id;
    const report = await this.api.getReport(runId, {
      top_chart: options.topChart,
      top_heatmap: options.topHeatmap,
      top_relevance: options.topRelevance,
      lambda: options.lambda,
    });
    if (!this.session.attachReport(runId, report)) {
      return; // stale: the tree was rebuilt while the request was in flight
    }
    if (this.session.activeRunId === runId) {
      this.renderReport(active, report);
    }
  }

  private renderRunStatus(handle: RunHandle): void {
    this.el<HTMLElement>("#run-pane").hidden = false;
    this.el<HTMLElement>("#run-status").textContent =
      `${handle.run_id} [k=${handle.k}, N=${handle.n_rows}]: ${handle.status}`;
  }

  private renderReport(node: RunNode, report: Report): void {
    this.renderBreadcrumb();
    this.el<HTMLElement>("#chart").innerHTML = renderFrequencyChart(
      report.frequency_chart,
    );
    this.renderVirtualHeatmap(report);
    this.el<HTMLElement>("#relevance").innerHTML = renderRelevanceTables(
      report.relevance,
    );
    this.renderDrillActions(node, report);
  }

  private renderVirtualHeatmap(report: Report): void {
    const viewport = this.el<HTMLElement>("#heatmap-viewport");
    const totalRows = flattenHeatmap(report.heatmap).length;
    const draw = () => {
      const window = computeRowWindow(
        totalRows,
        HEATMAP_GEOMETRY.rowHeight,
        viewport.scrollTop,
        viewport.clientHeight || 400,
      );
      viewport.innerHTML = renderHeatmap(report.heatmap, window);
    };
    viewport.onscroll = draw;
    draw();
  }

  private renderDrillActions(node: RunNode, report: Report): void {
    const container = this.el<HTMLElement>("#drill-actions");
    container.innerHTML = "";
    report.sizes.forEach((size, clusterIndex) => {
      const button = document.createElement("button");
      button.textContent = `split cluster ${clusterIndex} (${size} rows)`;
      if (size === 0) {
        button.disabled = true;
        button.title = "cluster is empty — nothing to split";
      } else {
        button.addEventListener("click", () => {
          const k = Number(this.el<HTMLInputElement>("#k").value);
          void this.guarded(async () => {
            try {
              await this.drillDown(node.handle.run_id, clusterIndex, k);
            } catch (err) {
              if (err instanceof ApiRequestError && err.status === 422) {
                button.disabled = true;
                button.title = err.message;
                return;
              }
              throw err;
            }
          });
        });
      }
      container.appendChild(button);
    });
  }

  private renderBreadcrumb(): void {
    const nav = this.el<HTMLElement>("#breadcrumb");
    nav.innerHTML = "";
    const activeId = this.session.activeRunId;
    if (activeId === null) {
      return;
    }
    this.session.breadcrumb(activeId).forEach((entry, index) => {
      if (index > 0) {
        nav.appendChild(document.createTextNode(" › "));
      }
      const link = document.createElement("a");
      link.href = "#";
      link.textContent =
        entry.cluster_index === null
          ? `${entry.run_id} (k=${entry.k})`
          : `cluster ${entry.cluster_index} → ${entry.run_id} (k=${entry.k})`;
      link.addEventListener("click", (event) => {
        event.preventDefault();
        this.session.focus(entry.run_id);
        void this.guarded(() => this.refreshReport());
      });
      nav.appendChild(link);
    });
  }

  private renderTree(): void {
    const aside = this.el<HTMLElement>("#run-tree");
    aside.innerHTML = "";
    const renderNode = (node: RunNode, depth: number) => {
      const line = document.createElement("div");
      line.style.paddingLeft = `${depth * 14}px`;
      const link = document.createElement("a");
      link.href = "#";
      link.textContent = `${node.handle.run_id} [k=${node.handle.k}] ${node.handle.status}`;
      if (node.handle.run_id === this.session.activeRunId) {
        link.className = "active";
      }
      link.addEventListener("click", (event) => {
        event.preventDefault();
        this.session.focus(node.handle.run_id);
        void this.guarded(() => this.refreshReport());
      });
      line.appendChild(link);
      aside.appendChild(line);
      node.children.forEach((child) => renderNode(child, depth + 1));
    };
    this.session.rootRuns.forEach((node) => renderNode(node, 0));
  }

  private async stability(): Promise<void> {
    const datasetId = this.session.datasetId;
    if (datasetId === null) {
      return;
    }
    const k = Number(this.el<HTMLInputElement>("#k").value);
    const result = await this.api.checkStability(datasetId, { k });
    this.el<HTMLElement>("#stability-result").textContent =
      `split-half ARI = ${result.ari}`;
  }
}

export function initExplorer(root: HTMLElement, baseUrl = ""): ExplorerApp {
  return new ExplorerApp(root, new ApiClient(baseUrl));
}
