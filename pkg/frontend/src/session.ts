import type { Report, RunHandle } from "./types.js";

export interface UiOptions {
  lambda: number;
  topChart: number;
  topHeatmap: number;
  topRelevance: number;
}

export const DEFAULT_UI_OPTIONS: UiOptions = {
  lambda: 0.6,
  topChart: 20,
  topHeatmap: 40,
  topRelevance: 10,
};

export interface RunNode {
  handle: RunHandle;
  report: Report | null;
  children: RunNode[];
}

export interface BreadcrumbEntry {
  run_id: string;
  /** Which parent cluster this run drilled into; null for root runs. */
  cluster_index: number | null;
  k: number;
}

/**
 * Client-side exploration state: one dataset, a tree of runs (sub-cluster
 * children under their parents), the focused run, and the display options.
 * Holds only server-issued ids and payloads — reconstructable from them.
 */
export class ExplorationSession {
  datasetId: string | null = null;
  activeRunId: string | null = null;
  readonly uiOptions: UiOptions;

  private nodes = new Map<string, RunNode>();
  private roots: RunNode[] = [];

  constructor(uiOptions: Partial<UiOptions> = {}) {
    this.uiOptions = { ...DEFAULT_UI_OPTIONS, ...uiOptions };
  }

  /** Start exploring a dataset; drops the run tree, keeps display options. */
  setDataset(datasetId: string): void {
    this.datasetId = datasetId;
    this.activeRunId = null;
    this.nodes = new Map();
    this.roots = [];
  }

  get rootRuns(): readonly RunNode[] {
    return this.roots;
  }

  get runCount(): number {
    return this.nodes.size;
  }

  getRun(runId: string): RunNode | undefined {
    return this.nodes.get(runId);
  }

  get activeRun(): RunNode | undefined {
    return this.activeRunId === null ? undefined : this.nodes.get(this.activeRunId);
  }

  /**
   * Insert a run the server just created and focus it. The tree edge must
   * match the server's lineage: a run with a parent_run id attaches under
   * exactly that node.
   */
  addRun(handle: RunHandle): RunNode {
    if (this.datasetId !== null && handle.dataset_id !== this.datasetId) {
      throw new Error(
        `run ${handle.run_id} belongs to ${handle.dataset_id}, session is on ${this.datasetId}`,
      );
    }
    if (this.nodes.has(handle.run_id)) {
      throw new Error(`run ${handle.run_id} already in the tree`);
    }
    const node: RunNode = { handle, report: null, children: [] };
    if (handle.parent_run === null) {
      this.roots.push(node);
    } else {
      const parent = this.nodes.get(handle.parent_run);
      if (parent === undefined) {
        throw new Error(`parent run ${handle.parent_run} is not in the tree`);
      }
      parent.children.push(node);
    }
    this.nodes.set(handle.run_id, node);
    this.activeRunId = handle.run_id;
    return node;
  }

  /**
   * Apply a freshly polled handle. Returns false (and discards the update)
   * when the run is no longer part of this session — the stale-response
   * guard for superseded polls.
   */
  updateRun(handle: RunHandle): boolean {
    const node = this.nodes.get(handle.run_id);
    if (node === undefined) {
      return false;
    }
    node.handle = handle;
    return true;
  }

  /** Attach a report payload; false means the response was stale. */
  attachReport(runId: string, report: Report): boolean {
    const node = this.nodes.get(runId);
    if (node === undefined) {
      return false;
    }
    node.report = report;
    return true;
  }

  focus(runId: string): boolean {
    if (!this.nodes.has(runId)) {
      return false;
    }
    this.activeRunId = runId;
    return true;
  }

  /** Root-to-run lineage, straight off the stored server handles. */
  breadcrumb(runId: string): BreadcrumbEntry[] {
    const chain: BreadcrumbEntry[] = [];
    let current = this.nodes.get(runId);
    while (current !== undefined) {
      chain.unshift({
        run_id: current.handle.run_id,
        cluster_index: current.handle.cluster_index,
        k: current.handle.k,
      });
      current =
        current.handle.parent_run === null
          ? undefined
          : this.nodes.get(current.handle.parent_run);
    }
    return chain;
  }

  /** Depth of a run in the tree: 1 for roots, 2 for their children, ... */
  depth(runId: string): number {
    return this.breadcrumb(runId).length;
  }
}
