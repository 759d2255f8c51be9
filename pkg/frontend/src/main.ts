import { ApiClient } from "./api.js";
import { renderBenchmark } from "./benchmark.js";
import { renderContributions, renderHeatmap } from "./heatmap.js";
import { renderCorrelations, renderForecast } from "./panels.js";
import { renderWhatIf, WhatIfSession } from "./whatif.js";
import type { HeatmapNode } from "./types.js";

const DEFAULT_SERVER = "http://127.0.0.1:8000";
const DEBOUNCE_MS = 150;

interface AppState {
  account: string | null;
  period: string;
  accounts: string[];
  tree: HeatmapNode | null;
  expanded: Set<string>;
  selectedLeaf: HeatmapNode | null;
  session: WhatIfSession | null;
  error: string | null;
}

function element(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found;
}

export function startApp(root: Document, serverUrl = DEFAULT_SERVER): void {
  const api = new ApiClient(serverUrl);
  const state: AppState = {
    account: null,
    period: "2019-12",
    accounts: [],
    tree: null,
    expanded: new Set(),
    selectedLeaf: null,
    session: null,
    error: null,
  };
  let slideTimer: number | undefined;

  const accountSelect = element("account") as HTMLSelectElement;
  const periodInput = element("period") as HTMLInputElement;
  periodInput.value = state.period;

  function showError(message: string | null): void {
    const banner = element("app-error");
    banner.textContent = message ?? "";
    banner.classList.toggle("hidden", message === null);
  }

  function drawHeatmap(): void {
    if (!state.tree) return;
    try {
      drawHeatmapOrThrow();
    } catch (error) {
      element("heatmap").innerHTML = "";
      showError(String(error));
    }
  }

  function drawHeatmapOrThrow(): void {
    if (!state.tree) return;
    renderHeatmap(element("heatmap"), state.tree, {
      expanded: state.expanded,
      selectedKpi: state.selectedLeaf?.kpi_id ?? null,
    }, {
      onToggle(path) {
        if (state.expanded.has(path)) state.expanded.delete(path);
        else state.expanded.add(path);
        drawHeatmap();
      },
      onSelectLeaf(node) {
        state.selectedLeaf = node;
        drawHeatmap();
        void openLeafPanels(node);
      },
    });
  }

  async function openLeafPanels(node: HeatmapNode): Promise<void> {
    if (!state.account || !node.kpi_id) return;
    renderContributions(element("contributions"), node);

    const weights: Record<string, number> = {};
    for (const c of node.contributions ?? []) weights[c.om_id] = c.weight;
    state.session = new WhatIfSession(
      api, state.account, state.period, node.kpi_id, weights);
    await state.session.submit(); // baseline score from the engine
    drawWhatIf();

    try {
      renderBenchmark(
        element("benchmark"),
        await api.benchmark(node.kpi_id, state.account, state.period));
    } catch (error) {
      element("benchmark").textContent = String(error);
    }
    try {
      renderForecast(
        element("forecast"),
        await api.forecast(node.kpi_id, state.account, "ma"));
    } catch (error) {
      element("forecast").textContent = String(error);
    }
  }

  function drawWhatIf(): void {
    if (!state.session) return;
    renderWhatIf(element("whatif"), state.session, (omId, value) => {
      if (!state.session) return;
      state.session.adjust(omId, value);
      window.clearTimeout(slideTimer);
      slideTimer = window.setTimeout(() => {
        void state.session?.submit().then(() => drawWhatIf());
      }, DEBOUNCE_MS);
    });
  }

  async function loadAccount(): Promise<void> {
    if (!state.account) return;
    try {
      state.tree = await api.heatmap(state.account, state.period);
      state.expanded = new Set([state.tree.label]);
      state.selectedLeaf = null;
      state.session = null;
      showError(null);
      drawHeatmap();
      renderCorrelations(
        element("correlations"),
        await api.correlations(state.account, "rsquared"));
    } catch (error) {
      showError(String(error));
    }
  }

  accountSelect.addEventListener("change", () => {
    state.account = accountSelect.value;
    void loadAccount();
  });
  periodInput.addEventListener("change", () => {
    state.period = periodInput.value;
    void loadAccount();
  });

  void api
    .accounts()
    .then(({ accounts }) => {
      state.accounts = accounts;
      accountSelect.innerHTML = accounts
        .map((a) => `<option value="${a}">${a}</option>`)
        .join("");
      state.account = accounts[0] ?? null;
      return loadAccount();
    })
    .catch((error) => showError(String(error)));
}

declare global {
  interface Window {
    __THC_SERVER__?: string;
  }
}

if (typeof document !== "undefined" && document.getElementById("heatmap")) {
  startApp(document, window.__THC_SERVER__ ?? DEFAULT_SERVER);
}
