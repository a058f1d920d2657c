import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { LeaderboardController, clampSlider } from "../src/state.js";
import { renderedOrder } from "../src/table.js";
import {
  flushMicrotasks,
  manualFetch,
  routedFetch,
  sentimentCustom,
  sentimentDefault,
  sentimentTask,
} from "./helpers.js";

describe("clampSlider", () => {
  it("clamps to [0, 10] integers", () => {
    expect(clampSlider(-3)).toBe(0);
    expect(clampSlider(0)).toBe(0);
    expect(clampSlider(4.4)).toBe(4);
    expect(clampSlider(10)).toBe(10);
    expect(clampSlider(15)).toBe(10);
    expect(clampSlider(Number.NaN)).toBe(0);
  });
});

function sentimentRoutes() {
  return routedFetch([
    ["GET", "/api/tasks/sentiment", sentimentTask],
    ["GET", "/api/tasks/sentiment/leaderboard", sentimentDefault],
    ["POST", "/api/tasks/sentiment/score", sentimentCustom],
  ]);
}

describe("LeaderboardController", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("selecting a task loads the default leaderboard and integer default sliders", async () => {
    const { fetchFn } = sentimentRoutes();
    const controller = new LeaderboardController(new ApiClient("", fetchFn));
    await controller.selectTask("sentiment");
    const state = controller.getState();
    expect(state.task?.task_id).toBe("sentiment");
    // five metrics: performance-takes-half is 4:1:1:1:1 in integers
    expect(state.metricSliders).toEqual({
      macro_f1: 4, throughput: 1, memory: 1, fairness: 1, robustness: 1,
    });
    expect(renderedOrder(state.response!).slice(0, 3)).toEqual([
      "DeBERTa", "RoBERTa", "T5",
    ]);
  });

  it("a slider drag triggers exactly one debounced score call", async () => {
    const { fetchFn, calls } = sentimentRoutes();
    const controller = new LeaderboardController(new ApiClient("", fetchFn));
    await controller.selectTask("sentiment");
    const before = calls.filter((c) => c.url.endsWith("/score")).length;

    controller.setMetricWeight("throughput", 3);
    controller.setMetricWeight("throughput", 5);
    controller.setMetricWeight("memory", 6);
    controller.setMetricWeight("memory", 8);
    controller.setMetricWeight("throughput", 8);
    await vi.advanceTimersByTimeAsync(149);
    expect(calls.filter((c) => c.url.endsWith("/score")).length).toBe(before);
    await vi.advanceTimersByTimeAsync(2);
    const scoreCalls = calls.filter((c) => c.url.endsWith("/score"));
    expect(scoreCalls.length).toBe(before + 1);
    // the one request carries the final slider state
    const body = scoreCalls.at(-1)!.body as {
      metric_weights: Record<string, number>;
    };
    expect(body.metric_weights.throughput).toBe(8);
    expect(body.metric_weights.memory).toBe(8);
  });

  it("pending flag rises on slider change and clears on response", async () => {
    const { fetchFn } = sentimentRoutes();
    const controller = new LeaderboardController(new ApiClient("", fetchFn));
    await controller.selectTask("sentiment");
    expect(controller.getState().pending).toBe(false);
    controller.setMetricWeight("memory", 9);
    expect(controller.getState().pending).toBe(true);
    await vi.advanceTimersByTimeAsync(151);
    expect(controller.getState().pending).toBe(false);
  });
});

describe("stale response guard", () => {
  it("never renders a response older than the latest issued request", async () => {
    vi.useRealTimers();
    const { fetchFn, pending } = manualFetch();
    const controller = new LeaderboardController(new ApiClient("", fetchFn), 1);

    const selecting = controller.selectTask("sentiment");
    await flushMicrotasks();
    pending.shift()!.resolve(sentimentTask());
    await flushMicrotasks();
    pending.shift()!.resolve(sentimentDefault());
    await selecting;

    // request 1: weights A
    controller.setMetricWeight("throughput", 8);
    controller.flush();
    await flushMicrotasks();
    // request 2: weights B
    controller.setMetricWeight("memory", 8);
    controller.flush();
    await flushMicrotasks();

    expect(pending.length).toBe(2);
    const [first, second] = [pending.shift()!, pending.shift()!];

    // the newer request resolves first...
    second.resolve(sentimentCustom());
    await flushMicrotasks();
    expect(renderedOrder(controller.getState().response!).indexOf("FastText")).toBeLessThan(
      renderedOrder(controller.getState().response!).indexOf("T5"),
    );

    // ...then the stale one arrives and must be dropped
    first.resolve(sentimentDefault());
    await flushMicrotasks();
    const order = renderedOrder(controller.getState().response!);
    expect(order.indexOf("FastText")).toBeLessThan(order.indexOf("T5"));
  });
});

describe("weight errors", () => {
  it("renders an inline error and keeps the previous table on 400", async () => {
    vi.useFakeTimers();
    const { fetchFn } = routedFetch([
      ["GET", "/api/tasks/sentiment", sentimentTask],
      ["GET", "/api/tasks/sentiment/leaderboard", sentimentDefault],
      [
        "POST",
        "/api/tasks/sentiment/score",
        () => ({ code: "invalid_weights", message: "metric_weights sum to zero" }),
        400,
      ],
    ]);
    const controller = new LeaderboardController(new ApiClient("", fetchFn));
    await controller.selectTask("sentiment");
    const tableBefore = controller.getState().response;

    for (const mid of ["macro_f1", "throughput", "memory", "fairness", "robustness"]) {
      controller.setMetricWeight(mid, 0);
    }
    await vi.advanceTimersByTimeAsync(151);

    const state = controller.getState();
    expect(state.error?.message).toContain("sum to zero");
    expect(state.response).toBe(tableBefore); // table unchanged
    vi.useRealTimers();
  });
});
