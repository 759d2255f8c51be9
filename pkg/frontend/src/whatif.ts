import { ApiClient, ApiError } from "./api.js";
import type { KpiScore, WhatIfResponse } from "./types.js";

export interface WhatIfView {
  /** Score for the session's KPI straight from the engine response. */
  score: KpiScore | null;
  error: string | null;
  weights: Record<string, number>;
}

/**
 * One slider session for one KPI. Slider moves renormalize the remaining
 * weights proportionally so they always sum to 1, then ask the engine to
 * recompute; the displayed score is whatever the engine answered. A newer
 * slider move supersedes any response still in flight, and a rejected
 * overlay reverts the sliders to the last accepted weights.
 */
export class WhatIfSession {
  private weights: Record<string, number>;
  private lastAccepted: Record<string, number>;
  private sequence = 0;
  lastResponse: WhatIfResponse | null = null;
  lastError: string | null = null;

  constructor(
    private readonly api: ApiClient,
    readonly accountId: string,
    readonly period: string,
    readonly kpiId: string,
    initialWeights: Record<string, number>,
  ) {
    this.weights = { ...initialWeights };
    this.lastAccepted = { ...initialWeights };
  }

  currentWeights(): Record<string, number> {
    return { ...this.weights };
  }

  /** Proportionally renormalize the other sliders so the sum stays 1. */
  adjust(omId: string, value: number): Record<string, number> {
    if (!(omId in this.weights)) throw new Error(`unknown slider ${omId}`);
    const clamped = Math.min(Math.max(value, 0), 1);
    const others = Object.keys(this.weights).filter((k) => k !== omId);
    const remainder = 1 - clamped;
    const otherSum = others.reduce((sum, k) => sum + (this.weights[k] ?? 0), 0);
    const next: Record<string, number> = { [omId]: clamped };
    for (const k of others) {
      next[k] = otherSum > 0
        ? ((this.weights[k] ?? 0) / otherSum) * remainder
        : remainder / others.length;
    }
    this.weights = next;
    return this.currentWeights();
  }

  /** Submit the current weights; stale responses are dropped. */
  async submit(): Promise<WhatIfView> {
    const ticket = ++this.sequence;
    try {
      const response = await this.api.whatIf(
        this.accountId, this.period, this.kpiId, this.weights);
      if (ticket !== this.sequence) return this.view(); // superseded
      this.lastResponse = response;
      this.lastError = null;
      this.lastAccepted = { ...this.weights };
    } catch (error) {
      if (ticket !== this.sequence) return this.view(); // superseded
      // engine rejected the overlay: surface its message, revert sliders
      this.lastError = error instanceof ApiError ? error.message : String(error);
      this.weights = { ...this.lastAccepted };
    }
    return this.view();
  }

  view(): WhatIfView {
    const score =
      this.lastResponse?.scores.find((s) => s.kpi_id === this.kpiId) ?? null;
    return { score, error: this.lastError, weights: this.currentWeights() };
  }
}

/** Render sliders plus the engine-reported score. */
export function renderWhatIf(
  root: HTMLElement,
  session: WhatIfSession,
  onSlide: (omId: string, value: number) => void,
): void {
  const { score, error, weights } = session.view();
  root.innerHTML = "";

  const heading = document.createElement("div");
  heading.className = "whatif-score";
  heading.innerHTML = score
    ? `re-weighted score: <strong data-score>${String(score.value)}</strong>
       <span class="band-chip band-${score.band ?? "missing"}">${score.band ?? "n/a"}</span>`
    : `re-weighted score: <strong>–</strong>`;
  root.appendChild(heading);

  if (error) {
    const banner = document.createElement("div");
    banner.className = "error-banner";
    banner.textContent = error;
    root.appendChild(banner);
  }

  for (const [omId, weight] of Object.entries(weights)) {
    const row = document.createElement("label");
    row.className = "slider-row";
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = String(weight);
    slider.dataset.omId = omId;
    slider.addEventListener("input", () => onSlide(omId, Number(slider.value)));
    const caption = document.createElement("span");
    caption.textContent = `${omId} (${weight.toFixed(3)})`;
    row.appendChild(caption);
    row.appendChild(slider);
    root.appendChild(row);
  }
}
