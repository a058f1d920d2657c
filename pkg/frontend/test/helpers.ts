import { readFileSync } from "node:fs";
import { fileURLToPath } from "node:url";

import { FetchLike, ScoreResponseDoc, TaskDoc } from "../src/api.js";

export function loadFixture<T>(name: string): T {
  const path = fileURLToPath(new URL(`./fixtures/${name}`, import.meta.url));
  return JSON.parse(readFileSync(path, "utf-8")) as T;
}

export const sentimentTask = () => loadFixture<TaskDoc>("sentiment_task.json");
export const sentimentDefault = () => loadFixture<ScoreResponseDoc>("sentiment_default.json");
export const sentimentCustom = () => loadFixture<ScoreResponseDoc>("sentiment_custom.json");

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

/** Routes requests by (method, url-suffix) to canned bodies and records
 * every call. */
export function routedFetch(
  routes: Array<[method: string, suffix: string, body: () => unknown, status?: number]>,
  calls: RecordedCall[] = [],
): { fetchFn: FetchLike; calls: RecordedCall[] } {
  const fetchFn: FetchLike = async (url, init) => {
    const method = init?.method ?? "GET";
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ url, method, body });
    for (const [routeMethod, suffix, make, status] of routes) {
      if (method === routeMethod && url.endsWith(suffix)) {
        return jsonResponse(make(), status ?? 200);
      }
    }
    throw new Error(`no route for ${method} ${url}`);
  };
  return { fetchFn, calls };
}

/** A fetch whose responses are resolved by hand, for out-of-order tests. */
export function manualFetch(): {
  fetchFn: FetchLike;
  pending: Array<{ url: string; body: unknown; resolve: (doc: unknown, status?: number) => void }>;
} {
  const pending: Array<{
    url: string;
    body: unknown;
    resolve: (doc: unknown, status?: number) => void;
  }> = [];
  const fetchFn: FetchLike = (url, init) =>
    new Promise<Response>((resolvePromise) => {
      pending.push({
        url,
        body: init?.body ? JSON.parse(init.body as string) : undefined,
        resolve: (doc, status = 200) => resolvePromise(jsonResponse(doc, status)),
      });
    });
  return { fetchFn, pending };
}

export const flushMicrotasks = () => new Promise<void>((resolve) => setTimeout(resolve, 0));
