// Leaderboard view state and the request pipeline behind the sliders.
//
// Slider values are integers clamped to [0, 10]. Weight changes flow
// through a 150 ms debounce into POST /score; responses carry a
// monotonically increasing request id and a response only renders if no
// newer request has been issued since (stale responses are dropped), so
// the table always corresponds to the current slider positions.

import { ApiClient, ApiError, ScoreResponseDoc, TaskDoc } from "./api.js";
import { debounce, Debounced } from "./debounce.js";

export const SLIDER_MIN = 0;
export const SLIDER_MAX = 10;
export const DEBOUNCE_MS = 150;

export function clampSlider(value: number): number {
  if (Number.isNaN(value)) return SLIDER_MIN;
  return Math.min(SLIDER_MAX, Math.max(SLIDER_MIN, Math.round(value)));
}

export interface InlineError {
  field: string | null;
  message: string;
}

export interface ViewState {
  task: TaskDoc | null;
  metricSliders: Record<string, number>;
  datasetSliders: Record<string, number>;
  response: ScoreResponseDoc | null;
  pending: boolean;
  error: InlineError | null;
}

type Listener = (state: ViewState) => void;

export class LeaderboardController {
  private state: ViewState = {
    task: null,
    metricSliders: {},
    datasetSliders: {},
    response: null,
    pending: false,
    error: null,
  };
  private listeners: Listener[] = [];
  private nextRequestId = 0;
  private latestIssuedId = 0;
  private readonly scheduleScore: Debounced<[]>;

  constructor(private readonly api: ApiClient, debounceMs: number = DEBOUNCE_MS) {
    this.scheduleScore = debounce(() => void this.issueScore(), debounceMs);
  }

  getState(): ViewState {
    return this.state;
  }

  subscribe(listener: Listener): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  /** Select a task: sliders reset to the default weighting expressed in
   * integers (performance m-1, every other metric 1, which normalizes to
   * the performance-takes-half default; datasets from the task config),
   * and the default leaderboard is fetched. */
  async selectTask(taskId: string): Promise<void> {
    this.scheduleScore.cancel();
    const task = await this.api.getTask(taskId);
    const perfDefault = clampSlider(Math.max(1, task.metrics.length - 1));
    const metricSliders: Record<string, number> = {};
    for (const metric of task.metrics) {
      metricSliders[metric.metric_id] =
        metric.metric_id === task.perf_metric_id ? perfDefault : 1;
    }
    const datasetSliders: Record<string, number> = {};
    for (const dataset of task.datasets) {
      datasetSliders[dataset.dataset_id] = Math.max(1, clampSlider(dataset.default_weight));
    }
    this.emit({ task, metricSliders, datasetSliders, response: null, error: null, pending: true });
    const requestId = ++this.nextRequestId;
    this.latestIssuedId = requestId;
    try {
      const response = await this.api.leaderboard(taskId);
      if (this.isStale(requestId)) return;
      this.emit({ response, pending: false, error: null });
    } catch (error) {
      if (this.isStale(requestId)) return;
      this.emit({ pending: false, error: toInlineError(error) });
    }
  }

  setMetricWeight(metricId: string, value: number): void {
    if (!this.state.task) return;
    this.emit({
      metricSliders: { ...this.state.metricSliders, [metricId]: clampSlider(value) },
      pending: true,
    });
    this.scheduleScore();
  }

  setDatasetWeight(datasetId: string, value: number): void {
    if (!this.state.task) return;
    this.emit({
      datasetSliders: { ...this.state.datasetSliders, [datasetId]: clampSlider(value) },
      pending: true,
    });
    this.scheduleScore();
  }

  /** Fire the debounced request immediately (used on slider release). */
  flush(): void {
    this.scheduleScore.flush();
  }

  private isStale(requestId: number): boolean {
    return requestId !== this.latestIssuedId;
  }

  private async issueScore(): Promise<void> {
    const task = this.state.task;
    if (!task) return;
    const requestId = ++this.nextRequestId;
    this.latestIssuedId = requestId;
    try {
      const response = await this.api.score(
        task.task_id,
        { ...this.state.metricSliders },
        { ...this.state.datasetSliders },
      );
      if (this.isStale(requestId)) return; // a newer request owns the table
      this.emit({ response, pending: false, error: null });
    } catch (error) {
      if (this.isStale(requestId)) return;
      // leave the previous table rendered; surface the error inline
      this.emit({ pending: false, error: toInlineError(error) });
    }
  }
}

function toInlineError(error: unknown): InlineError {
  if (error instanceof ApiError) {
    return { field: error.body.field ?? null, message: error.body.message };
  }
  return { field: null, message: error instanceof Error ? error.message : String(error) };
}
