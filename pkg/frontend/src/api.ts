import type {
  AccountsResponse,
  BenchmarkStats,
  CorrelationsResponse,
  ForecastResult,
  HeatmapNode,
  KpiScore,
  WhatIfResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

/** Thin typed client; all dashboard traffic funnels through here. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const text = await response.text();
    if (!response.ok) {
      let detail = text;
      try {
        detail = String(JSON.parse(text).detail ?? text);
      } catch {
        // non-JSON error body: surface it as-is
      }
      throw new ApiError(response.status, detail);
    }
    return JSON.parse(text) as T;
  }

  accounts(): Promise<AccountsResponse> {
    return this.request("/accounts");
  }

  heatmap(account: string, period: string): Promise<HeatmapNode> {
    return this.request(`/accounts/${encodeURIComponent(account)}/heatmap?period=${encodeURIComponent(period)}`);
  }

  kpiScores(account: string, period: string): Promise<KpiScore[]> {
    return this.request(`/accounts/${encodeURIComponent(account)}/kpis?period=${encodeURIComponent(period)}`);
  }

  benchmark(kpi: string, account: string, period: string): Promise<BenchmarkStats> {
    return this.request(
      `/kpis/${encodeURIComponent(kpi)}/benchmark?account=${encodeURIComponent(account)}&period=${encodeURIComponent(period)}`,
    );
  }

  forecast(kpi: string, account: string, method: string): Promise<ForecastResult> {
    return this.request(
      `/kpis/${encodeURIComponent(kpi)}/forecast?account=${encodeURIComponent(account)}&method=${encodeURIComponent(method)}`,
    );
  }

  correlations(account: string, mode: string): Promise<CorrelationsResponse> {
    return this.request(
      `/accounts/${encodeURIComponent(account)}/correlations?mode=${encodeURIComponent(mode)}`,
    );
  }

  whatIf(account: string, period: string, kpiId: string, weights: Record<string, number>): Promise<WhatIfResponse> {
    return this.request("/whatif", {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify({
        account_id: account,
        period,
        overlay: { kpi_id: kpiId, weights },
      }),
    });
  }
}
