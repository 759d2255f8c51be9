import { escapeHtml, scoreText } from "./format.js";
import type { CorrelationsResponse, ForecastResult } from "./types.js";

export function renderForecast(root: HTMLElement, result: ForecastResult): void {
  root.innerHTML = `
    <div class="forecast">
      <span>${escapeHtml(result.kpi_id)} · ${result.method.toUpperCase()} →
        ${escapeHtml(result.horizon_period)}</span>
      <strong data-score>${scoreText(result.predicted)}</strong>
      <span class="mae">backtest MAE:
        <span data-score>${scoreText(result.backtest_mae)}</span></span>
    </div>`;
}

export function renderCorrelations(root: HTMLElement, payload: CorrelationsResponse): void {
  const rows = payload.correlations
    .map(
      (c) => `
      <tr class="${c.strongly_related ? "strong" : ""}">
        <td>${escapeHtml(c.kpi_a)}</td>
        <td>${escapeHtml(c.kpi_b)}</td>
        <td data-score>${scoreText(c.score)}</td>
        <td>${c.strongly_related ? "strongly related" : ""}</td>
      </tr>`,
    )
    .join("");
  root.innerHTML = `
    <table class="correlations">
      <thead><tr><th>KPI</th><th>KPI</th><th>score (${escapeHtml(payload.mode)})</th><th></th></tr></thead>
      <tbody>${rows || '<tr><td colspan="4">no computable pairs</td></tr>'}</tbody>
    </table>`;
}
