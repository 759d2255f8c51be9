// Score values are echoed exactly as the engine sent them: the dashboard
// performs no score arithmetic, not even rounding for display.

export function scoreText(value: number | null | undefined): string {
  return value === null || value === undefined ? "–" : String(value);
}

export function trendArrow(trend: number | null | undefined): string {
  if (trend === null || trend === undefined) return "";
  if (trend > 0) return "▲";
  if (trend < 0) return "▼";
  return "▶";
}

export function escapeHtml(text: string): string {
  return text
    .replaceAll("&", "&amp;")
    .replaceAll("<", "&lt;")
    .replaceAll(">", "&gt;")
    .replaceAll('"', "&quot;");
}
