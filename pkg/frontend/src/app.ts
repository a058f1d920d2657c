// DOM bootstrap: binds the controllers to the page. This is the only
// module that touches `document`; everything it displays comes from the
// controllers' state.

import { ApiClient } from "./api.js";
import { InteractController } from "./interact.js";
import { DEBOUNCE_MS, LeaderboardController, SLIDER_MAX, SLIDER_MIN } from "./state.js";
import {
  escapeHtml,
  renderDisclaimer,
  renderExchangeRates,
  renderTable,
  renderWarnings,
} from "./table.js";

const params = new URLSearchParams(window.location.search);
const apiBase = params.get("api") ?? "";
const api = new ApiClient(apiBase);
const board = new LeaderboardController(api, DEBOUNCE_MS);
const interact = new InteractController(api);

const el = (id: string) => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node;
};

function sliderRow(kind: "metric" | "dataset", id: string, value: number): string {
  return `
    <label class="slider-row">
      <span class="slider-name">${escapeHtml(id)}</span>
      <input type="range" min="${SLIDER_MIN}" max="${SLIDER_MAX}" step="1"
             value="${value}" data-kind="${kind}" data-id="${escapeHtml(id)}">
      <span class="slider-value">${value}</span>
    </label>`;
}

function renderSliders(): void {
  const state = board.getState();
  if (!state.task) return;
  el("metric-sliders").innerHTML = state.task.metrics
    .map((m) => sliderRow("metric", m.metric_id, state.metricSliders[m.metric_id] ?? 0))
    .join("");
  el("dataset-sliders").innerHTML = state.task.datasets
    .map((d) => sliderRow("dataset", d.dataset_id, state.datasetSliders[d.dataset_id] ?? 0))
    .join("");
  for (const input of document.querySelectorAll<HTMLInputElement>("input[type=range]")) {
    input.addEventListener("input", () => {
      const value = Number(input.value);
      (input.nextElementSibling as HTMLElement).textContent = String(value);
      if (input.dataset.kind === "metric") {
        board.setMetricWeight(input.dataset.id!, value);
      } else {
        board.setDatasetWeight(input.dataset.id!, value);
      }
    });
  }
}

board.subscribe((state) => {
  el("pending").style.visibility = state.pending ? "visible" : "hidden";
  if (state.error) {
    const where = state.error.field ? ` (${state.error.field})` : "";
    el("board-error").textContent = `${state.error.message}${where}`;
  } else {
    el("board-error").textContent = "";
  }
  if (state.task && state.response) {
    el("board-table").innerHTML = renderTable(state.task, state.response);
    el("exchange-rates").innerHTML = renderExchangeRates(state.response);
    el("board-warnings").innerHTML = renderWarnings(state.response);
    el("disclaimer").innerHTML = renderDisclaimer(state.response);
  }
});

interact.subscribe((state) => {
  const output = el("interact-output");
  switch (state.status) {
    case "pending":
      output.textContent = "…";
      break;
    case "done":
      output.innerHTML = `<span class="prediction">${escapeHtml(state.prediction ?? "")}</span>
        <span class="latency">${state.latencyMs?.toFixed(1)} ms</span>`;
      break;
    case "timeout":
      output.innerHTML = `<span class="state-timeout">timed out: ${escapeHtml(state.message ?? "")}</span>`;
      break;
    case "unavailable":
      output.innerHTML = `<span class="state-unavailable">unavailable: ${escapeHtml(state.message ?? "")}</span>`;
      break;
    case "invalid":
      output.textContent = state.message ?? "";
      break;
    default:
      output.textContent = "";
  }
  if (state.model) {
    const card = Object.entries(state.model.model_card)
      .map(([key, value]) => `<dt>${escapeHtml(key)}</dt><dd>${escapeHtml(value)}</dd>`)
      .join("");
    el("model-card").innerHTML = `<dl>${card}</dl>`;
  }
});

async function boot(): Promise<void> {
  const tasks = await api.listTasks();
  const select = el("task-select") as HTMLSelectElement;
  select.innerHTML = tasks
    .map((t) => `<option value="${escapeHtml(t.task_id)}">${escapeHtml(t.name)}</option>`)
    .join("");
  select.addEventListener("change", async () => {
    await board.selectTask(select.value);
    renderSliders();
  });

  const models = await api.listModels();
  const modelSelect = el("model-select") as HTMLSelectElement;
  modelSelect.innerHTML = models
    .map((m) => `<option value="${escapeHtml(m.model_id)}">${escapeHtml(m.name)}</option>`)
    .join("");
  modelSelect.addEventListener("change", () => void interact.loadModel(modelSelect.value));

  el("interact-send").addEventListener("click", () => {
    const text = (el("interact-input") as HTMLInputElement).value;
    void interact.send(modelSelect.value, "text", text);
  });

  if (tasks.length > 0) {
    select.value = tasks[0].task_id;
    await board.selectTask(tasks[0].task_id);
    renderSliders();
  }
  if (models.length > 0) {
    modelSelect.value = models[0].model_id;
    await interact.loadModel(models[0].model_id);
  }
}

void boot();
