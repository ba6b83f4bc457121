import type { HeatmapPayload } from "./types.js";

export interface HeatmapRow {
  rowId: string;
  cluster: number;
  /** Index of the cluster block this row belongs to (band parity source). */
  blockIndex: number;
  cells: number[];
}

export interface ClusterBand {
  cluster: number;
  startRow: number;
  rowCount: number;
}

export interface RowWindow {
  start: number;
  /** Exclusive. */
  end: number;
}

export interface HeatmapGeometry {
  cellWidth: number;
  rowHeight: number;
  labelWidth: number;
}

export const HEATMAP_GEOMETRY: HeatmapGeometry = {
  cellWidth: 7,
  rowHeight: 3,
  labelWidth: 0,
};

/** Rows in display order: cluster blocks back to back, as the server sent them. */
export function flattenHeatmap(payload: HeatmapPayload): HeatmapRow[] {
  const rows: HeatmapRow[] = [];
  payload.blocks.forEach((block, blockIndex) => {
    block.row_ids.forEach((rowId, i) => {
      rows.push({ rowId, cluster: block.cluster, blockIndex, cells: block.cells[i] });
    });
  });
  return rows;
}

/** One band per cluster block (empty clusters included), for backgrounds. */
export function clusterBands(payload: HeatmapPayload): ClusterBand[] {
  const bands: ClusterBand[] = [];
  let startRow = 0;
  for (const block of payload.blocks) {
    bands.push({ cluster: block.cluster, startRow, rowCount: block.row_ids.length });
    startRow += block.row_ids.length;
  }
  return bands;
}

/**
 * Which rows to materialize for the current scroll position. Keeps the DOM
 * budget flat no matter how many records the run holds.
 */
export function computeRowWindow(
  totalRows: number,
  rowHeight: number,
  scrollTop: number,
  viewportHeight: number,
  overscan = 10,
): RowWindow {
  if (totalRows <= 0 || rowHeight <= 0) {
    return { start: 0, end: 0 };
  }
  const first = Math.floor(Math.max(0, scrollTop) / rowHeight);
  const visible = Math.ceil(viewportHeight / rowHeight);
  const start = Math.min(Math.max(0, first - overscan), totalRows);
  const end = Math.max(start, Math.min(totalRows, first + visible + overscan));
  return { start, end };
}

function clampWindow(window: RowWindow, totalRows: number): RowWindow {
  const start = Math.min(Math.max(0, window.start), totalRows);
  const end = Math.min(Math.max(start, window.end), totalRows);
  return { start, end };
}

/**
 * Render the rows inside `window` (default: all) as an SVG string sized for
 * the FULL dataset, so the scroll container keeps its true height. Each
 * filled mark is one 1-entry of the payload's cell matrix; rows sit on
 * alternating cluster-band backgrounds.
 */
export function renderHeatmap(
  payload: HeatmapPayload,
  window?: RowWindow,
  geometry: HeatmapGeometry = HEATMAP_GEOMETRY,
): string {
  const rows = flattenHeatmap(payload);
  const bands = clusterBands(payload);
  const span = clampWindow(window ?? { start: 0, end: rows.length }, rows.length);
  const width = geometry.labelWidth + payload.features.length * geometry.cellWidth;
  const height = rows.length * geometry.rowHeight;

  const parts: string[] = [];
  parts.push(
    `<svg xmlns="http://www.w3.org/2000/svg" class="heatmap" width="${width}" ` +
      `height="${Math.max(height, 1)}" data-total-rows="${rows.length}" ` +
      `data-columns="${payload.features.length}" data-bands="${bands.length}">`,
  );
  for (const [bandIndex, band] of bands.entries()) {
    parts.push(
      `<rect class="band band-${bandIndex % 2 === 0 ? "even" : "odd"}" x="0" ` +
        `y="${band.startRow * geometry.rowHeight}" width="${width}" ` +
        `height="${band.rowCount * geometry.rowHeight}" ` +
        `data-cluster="${band.cluster}" data-row-count="${band.rowCount}"></rect>`,
    );
  }
  for (let index = span.start; index < span.end; index += 1) {
    const row = rows[index];
    const y = index * geometry.rowHeight;
    const marks = row.cells
      .map((cell, column) =>
        cell === 1
          ? `<rect class="mark" x="${geometry.labelWidth + column * geometry.cellWidth}" ` +
            `y="${y}" width="${geometry.cellWidth - 1}" ` +
            `height="${geometry.rowHeight - 1}" data-column="${column}"></rect>`
          : "",
      )
      .join("");
    parts.push(
      `<g class="heatmap-row" data-row-id="${row.rowId}" data-cluster="${row.cluster}" ` +
        `data-index="${index}">${marks}</g>`,
    );
  }
  parts.push("</svg>");
  return parts.join("");
}
