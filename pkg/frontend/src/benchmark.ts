import { escapeHtml, scoreText } from "./format.js";
import type { BenchmarkStats } from "./types.js";

/**
 * Subject score plotted against the cohort's min/median/max band. A subject
 * below the cohort minimum is flagged; a singleton cohort collapses the
 * band to one tick.
 */
export function renderBenchmark(root: HTMLElement, stats: BenchmarkStats): void {
  const low = Math.min(stats.cohort_min, stats.account_value);
  const high = Math.max(stats.cohort_max, stats.account_value);
  const span = high - low || 1;
  const percent = (value: number) => ((value - low) / span) * 100;
  const collapsed = stats.cohort_min === stats.cohort_max;

  root.innerHTML = `
    <div class="benchmark" data-kpi="${escapeHtml(stats.kpi_id)}">
      <div class="benchmark-track">
        <div class="cohort-band${collapsed ? " collapsed" : ""}"
             style="left:${percent(stats.cohort_min)}%;width:${
               percent(stats.cohort_max) - percent(stats.cohort_min)
             }%"></div>
        <div class="tick median" style="left:${percent(stats.cohort_median)}%"></div>
        <div class="marker subject${stats.below_min ? " below-min" : ""}"
             style="left:${percent(stats.account_value)}%"></div>
      </div>
      <div class="benchmark-legend">
        <span>you: <strong data-score>${scoreText(stats.account_value)}</strong></span>
        <span>min <span data-score>${scoreText(stats.cohort_min)}</span></span>
        <span>median <span data-score>${scoreText(stats.cohort_median)}</span></span>
        <span>max <span data-score>${scoreText(stats.cohort_max)}</span></span>
        <span>${stats.cohort_size} peer account${stats.cohort_size === 1 ? "" : "s"}</span>
        ${stats.below_min ? '<span class="flag below-min-flag">below cohort minimum</span>' : ""}
      </div>
    </div>`;
}
