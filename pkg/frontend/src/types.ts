// Wire types for the scoring service responses. Every numeric value shown
// in the UI originates from one of these payloads.

export type BandName = "green" | "yellow" | "red";

export interface Contribution {
  om_id: string;
  normalized: number | null;
  weight: number;
}

export interface HeatmapNode {
  label: string;
  score: number | null;
  band: BandName | null;
  trend: number | null;
  children: HeatmapNode[];
  kpi_id?: string | null;
  contributions?: Contribution[] | null;
}

export interface KpiScore {
  kpi_id: string;
  account_id: string;
  period: string;
  value: number | null;
  band: BandName | null;
  trend: number | null;
}

export interface BenchmarkStats {
  kpi_id: string;
  period: string;
  account_id: string;
  account_value: number;
  cohort_min: number;
  cohort_median: number;
  cohort_max: number;
  cohort_size: number;
  below_min: boolean;
}

export interface ForecastResult {
  kpi_id: string;
  account_id: string;
  method: "ma" | "ar" | "es";
  horizon_period: string;
  predicted: number;
  backtest_mae: number | null;
}

export interface CorrelationEntry {
  kpi_a: string;
  kpi_b: string;
  mode: string;
  score: number;
  strongly_related: boolean;
  fitted_values: number[];
  mean_k: number;
}

export interface CorrelationsResponse {
  account_id: string;
  mode: string;
  window: number;
  correlations: CorrelationEntry[];
}

export interface WhatIfResponse {
  account_id: string;
  period: string;
  catalog_version: number;
  scores: KpiScore[];
}

export interface AccountsResponse {
  accounts: string[];
}
