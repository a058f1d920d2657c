// Model interaction box: send a text, render the prediction, latency and
// model card. Timeout (504) and unavailable (503) states render
// distinctly; empty input never leaves the client.

import { ApiClient, ApiError, ModelDoc } from "./api.js";

export type InteractStatus = "idle" | "pending" | "done" | "timeout" | "unavailable" | "invalid";

export interface InteractState {
  status: InteractStatus;
  prediction: string | null;
  latencyMs: number | null;
  model: ModelDoc | null;
  message: string | null;
}

export class InteractController {
  private state: InteractState = {
    status: "idle",
    prediction: null,
    latencyMs: null,
    model: null,
    message: null,
  };
  private listeners: ((state: InteractState) => void)[] = [];

  constructor(private readonly api: ApiClient) {}

  getState(): InteractState {
    return this.state;
  }

  subscribe(listener: (state: InteractState) => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private emit(patch: Partial<InteractState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  async loadModel(modelId: string): Promise<void> {
    const model = await this.api.getModel(modelId);
    this.emit({ model, status: "idle", prediction: null, latencyMs: null, message: null });
  }

  async send(modelId: string, fieldName: string, text: string): Promise<void> {
    if (text.trim() === "") {
      this.emit({ status: "invalid", message: "enter some text first" });
      return; // no request leaves the client
    }
    this.emit({ status: "pending", message: null });
    try {
      const result = await this.api.predict(modelId, { [fieldName]: text });
      this.emit({
        status: "done",
        prediction: result.prediction.label ?? result.prediction.answer_text ?? "",
        latencyMs: result.latency_ms,
        message: null,
      });
    } catch (error) {
      if (error instanceof ApiError && error.status === 504) {
        this.emit({ status: "timeout", prediction: null, latencyMs: null,
                    message: error.body.message });
      } else if (error instanceof ApiError && error.status === 503) {
        this.emit({ status: "unavailable", prediction: null, latencyMs: null,
                    message: error.body.message });
      } else {
        this.emit({ status: "unavailable", prediction: null, latencyMs: null,
                    message: error instanceof Error ? error.message : String(error) });
      }
    }
  }
}
