// Typed client for the evalboard JSON API. Every number the UI shows
// comes out of these response documents; the UI never does scoring math.

export interface MetricSpecDoc {
  metric_id: string;
  unit: string;
  direction: "maximize" | "minimize";
  cap?: number;
}

export interface DatasetRefDoc {
  dataset_id: string;
  path: string;
  default_weight: number;
}

export interface TaskDoc {
  task_id: string;
  name: string;
  perf_metric_id: string;
  metrics: MetricSpecDoc[];
  datasets: DatasetRefDoc[];
  epsilon: number;
}

export interface LeaderboardRowDoc {
  model_id: string;
  rank: number;
  dynascore: number;
  avg_zscore: number;
  raw_values: Record<string, number>;
}

export interface ExchangeRatesDoc {
  perf_metric_id: string;
  metrics: Record<string, { amrs: number; pair_count: number }>;
  effective_amrs?: Record<string, number>;
  model_ids: string[];
  computed_at: string;
}

export interface ScoreResponseDoc {
  task_id: string;
  timestamp: string;
  weight_spec: {
    metric_weights: Record<string, number>;
    dataset_weights: Record<string, number>;
  };
  exchange_rates: ExchangeRatesDoc;
  rows: LeaderboardRowDoc[];
  warnings: string[];
  disclaimer: string;
}

export interface ModelDoc {
  model_id: string;
  name: string;
  owner: string;
  task_id: string;
  exec_ref: string;
  model_card: Record<string, string>;
}

export interface PredictResponseDoc {
  prediction: { uid: string; label?: string; answer_text?: string };
  latency_ms: number;
}

export interface ApiErrorDoc {
  code: string;
  message: string;
  field?: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly body: ApiErrorDoc,
  ) {
    super(body.message);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, body as ApiErrorDoc);
    }
    return body as T;
  }

  listTasks(): Promise<TaskDoc[]> {
    return this.request("/api/tasks");
  }

  getTask(taskId: string): Promise<TaskDoc> {
    return this.request(`/api/tasks/${encodeURIComponent(taskId)}`);
  }

  leaderboard(taskId: string): Promise<ScoreResponseDoc> {
    return this.request(`/api/tasks/${encodeURIComponent(taskId)}/leaderboard`);
  }

  score(
    taskId: string,
    metricWeights: Record<string, number>,
    datasetWeights: Record<string, number>,
  ): Promise<ScoreResponseDoc> {
    return this.request(`/api/tasks/${encodeURIComponent(taskId)}/score`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({
        metric_weights: metricWeights,
        dataset_weights: datasetWeights,
      }),
    });
  }

  getModel(modelId: string): Promise<ModelDoc> {
    return this.request(`/api/models/${encodeURIComponent(modelId)}`);
  }

  listModels(): Promise<ModelDoc[]> {
    return this.request("/api/models");
  }

  predict(modelId: string, input: Record<string, string>): Promise<PredictResponseDoc> {
    return this.request(`/api/models/${encodeURIComponent(modelId)}/predict`, {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ input }),
    });
  }
}
