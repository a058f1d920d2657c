// Pure render helpers: view state in, HTML string out. Every displayed
// number is copied from a ScoreResponse field (two-decimal display only).

import { ScoreResponseDoc, TaskDoc } from "./api.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

const fmt = (value: number) => value.toFixed(2);

export function renderTable(task: TaskDoc, response: ScoreResponseDoc): string {
  const metricIds = task.metrics.map((m) => m.metric_id);
  const head = [
    "<th>rank</th>",
    "<th>model</th>",
    ...metricIds.map((mid) => `<th>${escapeHtml(mid)}</th>`),
    "<th>dynascore</th>",
    "<th>avg z</th>",
  ].join("");
  const body = response.rows
    .map((row) => {
      const cells = [
        `<td>${row.rank}</td>`,
        `<td class="model" data-model="${escapeHtml(row.model_id)}">${escapeHtml(row.model_id)}</td>`,
        ...metricIds.map((mid) => `<td>${fmt(row.raw_values[mid])}</td>`),
        `<td class="dynascore">${fmt(row.dynascore)}</td>`,
        `<td>${fmt(row.avg_zscore)}</td>`,
      ].join("");
      return `<tr data-rank="${row.rank}">${cells}</tr>`;
    })
    .join("");
  return `<table class="board"><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
}

export function renderExchangeRates(response: ScoreResponseDoc): string {
  const entries = Object.entries(response.exchange_rates.metrics)
    .map(([metricId, entry]) => {
      const effective = response.exchange_rates.effective_amrs?.[metricId];
      const suffix =
        effective !== undefined && metricId !== response.exchange_rates.perf_metric_id
          ? ` (effective ${fmt(effective)})`
          : "";
      return `<li>${escapeHtml(metricId)}: ${fmt(entry.amrs)}${suffix}</li>`;
    })
    .join("");
  return `<ul class="rates">${entries}</ul>`;
}

export function renderWarnings(response: ScoreResponseDoc): string {
  if (response.warnings.length === 0) return "";
  const items = response.warnings.map((w) => `<li>${escapeHtml(w)}</li>`).join("");
  return `<ul class="warnings">${items}</ul>`;
}

export function renderDisclaimer(response: ScoreResponseDoc): string {
  return `<p class="disclaimer">${escapeHtml(response.disclaimer)}</p>`;
}

/** Model order as rendered, rank-ascending; used by tests and the app. */
export function renderedOrder(response: ScoreResponseDoc): string[] {
  return [...response.rows].sort((a, b) => a.rank - b.rank).map((row) => row.model_id);
}
