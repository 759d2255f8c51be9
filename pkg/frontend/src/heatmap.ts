import { escapeHtml, scoreText, trendArrow } from "./format.js";
import type { HeatmapNode } from "./types.js";

export interface HeatmapState {
  expanded: Set<string>;
  selectedKpi: string | null;
}

export interface HeatmapHandlers {
  onToggle(path: string): void;
  onSelectLeaf(node: HeatmapNode): void;
}

function bandClass(band: HeatmapNode["band"]): string {
  return band ? `band-${band}` : "band-missing";
}

function nodePath(parent: string, node: HeatmapNode): string {
  return parent ? `${parent}/${node.label}` : node.label;
}

function renderNode(
  node: HeatmapNode,
  path: string,
  state: HeatmapState,
  handlers: HeatmapHandlers,
): HTMLElement {
  const container = document.createElement("div");
  container.className = "heatmap-node";

  const cell = document.createElement("div");
  const isLeaf = node.children.length === 0;
  cell.className = `cell ${bandClass(node.band)}${isLeaf ? " leaf" : ""}`;
  cell.dataset.path = path;
  if (isLeaf && node.kpi_id) cell.dataset.kpiId = node.kpi_id;
  if (isLeaf && node.kpi_id === state.selectedKpi) cell.classList.add("selected");
  cell.innerHTML = `
    <span class="label">${escapeHtml(node.label)}</span>
    <span class="score" data-score>${scoreText(node.score)}</span>
    <span class="trend" data-trend>${trendArrow(node.trend)} ${
      node.trend === null ? "" : scoreText(node.trend)
    }</span>`;
  cell.addEventListener("click", () => {
    if (isLeaf) handlers.onSelectLeaf(node);
    else handlers.onToggle(path);
  });
  container.appendChild(cell);

  if (!isLeaf && state.expanded.has(path)) {
    const children = document.createElement("div");
    children.className = "heatmap-children";
    for (const child of node.children) {
      children.appendChild(renderNode(child, nodePath(path, child), state, handlers));
    }
    container.appendChild(children);
  }
  return container;
}

export class HeatmapSchemaError extends Error {}

function assertNodeShape(node: unknown, path: string): asserts node is HeatmapNode {
  if (typeof node !== "object" || node === null) {
    throw new HeatmapSchemaError(`${path}: not an object`);
  }
  const candidate = node as Record<string, unknown>;
  if (typeof candidate.label !== "string") {
    throw new HeatmapSchemaError(`${path}: missing label`);
  }
  if (candidate.band !== null && !["green", "yellow", "red"].includes(candidate.band as string)) {
    throw new HeatmapSchemaError(`${path}: unknown band ${String(candidate.band)}`);
  }
  if (candidate.score !== null && typeof candidate.score !== "number") {
    throw new HeatmapSchemaError(`${path}: score is not a number`);
  }
  if (!Array.isArray(candidate.children)) {
    throw new HeatmapSchemaError(`${path}: children is not an array`);
  }
  candidate.children.forEach((child, i) => assertNodeShape(child, `${path}.children[${i}]`));
}

/**
 * Draw the drill-down tree; expansion state lives in `state`. The payload
 * is validated up front, so a malformed tree throws before any DOM change
 * (no partial render).
 */
export function renderHeatmap(
  root: HTMLElement,
  tree: HeatmapNode,
  state: HeatmapState,
  handlers: HeatmapHandlers,
): void {
  assertNodeShape(tree, tree && typeof tree === "object" ? "root" : "payload");
  root.innerHTML = "";
  root.appendChild(renderNode(tree, tree.label, state, handlers));
}

/** Leaf drill-down detail: the KPI's contributing metrics. */
export function renderContributions(root: HTMLElement, node: HeatmapNode): void {
  const rows = (node.contributions ?? [])
    .map(
      (c) => `
      <tr>
        <td>${escapeHtml(c.om_id)}</td>
        <td data-score>${scoreText(c.normalized)}</td>
        <td data-weight>${String(c.weight)}</td>
      </tr>`,
    )
    .join("");
  root.innerHTML = `
    <table class="contributions">
      <thead><tr><th>metric</th><th>normalized</th><th>weight</th></tr></thead>
      <tbody>${rows}</tbody>
    </table>`;
}
