// The default-vs-custom re-ranking flip, demonstrated through the UI
// pipeline against captured sentiment fixture responses: under default
// weights the accuracy-heavy models lead and T5 sits above FastText;
// shifting weight onto throughput and memory flips FastText above T5.

import { describe, expect, it, vi } from "vitest";

import { ApiClient } from "../src/api.js";
import { LeaderboardController } from "../src/state.js";
import { renderTable, renderedOrder } from "../src/table.js";
import { routedFetch, sentimentCustom, sentimentDefault, sentimentTask } from "./helpers.js";

describe("default vs custom weight flip", () => {
  it("raising throughput+memory sliders flips FastText above T5", async () => {
    vi.useFakeTimers();
    const { fetchFn, calls } = routedFetch([
      ["GET", "/api/tasks/sentiment", sentimentTask],
      ["GET", "/api/tasks/sentiment/leaderboard", sentimentDefault],
      ["POST", "/api/tasks/sentiment/score", sentimentCustom],
    ]);
    const controller = new LeaderboardController(new ApiClient("", fetchFn));
    await controller.selectTask("sentiment");

    const defaultOrder = renderedOrder(controller.getState().response!);
    expect(defaultOrder.slice(0, 3)).toEqual(["DeBERTa", "RoBERTa", "T5"]);
    expect(defaultOrder.indexOf("T5")).toBeLessThan(defaultOrder.indexOf("FastText"));

    controller.setMetricWeight("macro_f1", 2);
    controller.setMetricWeight("throughput", 8);
    controller.setMetricWeight("memory", 8);
    await vi.advanceTimersByTimeAsync(151);

    const body = calls.filter((c) => c.method === "POST").at(-1)!.body as {
      metric_weights: Record<string, number>;
    };
    expect(body.metric_weights).toEqual({
      macro_f1: 2, throughput: 8, memory: 8, fairness: 1, robustness: 1,
    });

    const customOrder = renderedOrder(controller.getState().response!);
    expect(customOrder.indexOf("FastText")).toBeLessThan(customOrder.indexOf("T5"));
    vi.useRealTimers();
  });

  it("rendered numbers come verbatim from the response", async () => {
    const task = sentimentTask();
    const response = sentimentDefault();
    const html = renderTable(task, response);
    for (const row of response.rows) {
      expect(html).toContain(`data-model="${row.model_id}"`);
      expect(html).toContain(`>${row.dynascore.toFixed(2)}<`);
      for (const metric of task.metrics) {
        expect(html).toContain(`>${row.raw_values[metric.metric_id].toFixed(2)}<`);
      }
    }
    // rows render rank-ascending
    const ranks = [...html.matchAll(/data-rank="(\d+)"/g)].map((m) => Number(m[1]));
    expect(ranks).toEqual([...ranks].sort((a, b) => a - b));
  });
});
