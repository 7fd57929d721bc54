import { afterEach, describe, expect, it, vi } from "vitest";

import { ApiClient, ApiError, type RunEvent } from "../src/api";
import { debounce, initialState, StateStore } from "../src/state";
import { fixtureText } from "./helpers";

describe("state store", () => {
  it("rejects thresholds outside [0, 1]", () => {
    const store = new StateStore();
    expect(() => store.update({ threshold: 1.2 })).toThrow(RangeError);
    expect(() => store.update({ threshold: -0.1 })).toThrow(RangeError);
    store.update({ threshold: 1.0 });
    expect(store.get().threshold).toBe(1.0);
  });

  it("rejects non-positive band deltas", () => {
    const store = new StateStore();
    expect(() => store.update({ bandDelta: 0 })).toThrow(RangeError);
    store.update({ bandDelta: 0.02 });
    expect(store.get().bandDelta).toBe(0.02);
  });

  it("notifies subscribers and supports unsubscribe", () => {
    const store = new StateStore(initialState());
    const seen: number[] = [];
    const unsubscribe = store.subscribe((s) => seen.push(s.threshold));
    store.update({ threshold: 0.4 });
    unsubscribe();
    store.update({ threshold: 0.6 });
    expect(seen).toEqual([0.4]);
  });
});

describe("debounce", () => {
  it("coalesces rapid calls", () => {
    vi.useFakeTimers();
    const calls: number[] = [];
    const fn = debounce((v: number) => calls.push(v), 100);
    fn(1);
    fn(2);
    fn(3);
    vi.advanceTimersByTime(150);
    expect(calls).toEqual([3]);
    vi.useRealTimers();
  });
});

describe("api client", () => {
  afterEach(() => vi.unstubAllGlobals());

  it("parses NDJSON agent-run streams event by event", async () => {
    const body = fixtureText("agent_run_fail_iii.ndjson");
    vi.stubGlobal(
      "fetch",
      vi.fn(async () => new Response(body, { status: 200 })),
    );
    const client = new ApiClient("");
    const events: RunEvent[] = [];
    await client.runAgents(
      {
        cohort_id: "c",
        patient_id: "p",
        predictions_id: "x",
        matrix_id: "m",
        card_id: "k",
      },
      (event) => events.push(event),
    );
    expect(events.length).toBeGreaterThanOrEqual(5);
    expect(events.at(-1)!.event).toBe("run_completed");
    const failed = events.find((e) => e.event === "agent_failed");
    expect(failed && "agent" in failed && failed.agent).toBe("III");
  });

  it("turns service error bodies into ApiError with the service code", async () => {
    vi.stubGlobal(
      "fetch",
      vi.fn(
        async () =>
          new Response(
            JSON.stringify({ code: "not_found", message: "cohorts/zz does not exist" }),
            { status: 404 },
          ),
      ),
    );
    const client = new ApiClient("");
    await expect(client.getCohort("zz")).rejects.toMatchObject({
      status: 404,
      code: "not_found",
    });
    await expect(client.getCohort("zz")).rejects.toBeInstanceOf(ApiError);
  });

  it("builds /cip queries with optional grid", async () => {
    const seen: string[] = [];
    vi.stubGlobal(
      "fetch",
      vi.fn(async (url: string) => {
        seen.push(String(url));
        return new Response("{}", { status: 200 });
      }),
    );
    const client = new ApiClient("");
    await client.getCip("preds1", "mat1");
    await client.getCip("preds1", "mat1", "0:1:0.1");
    expect(seen[0]).toBe("/cip?predictions=preds1&matrix=mat1");
    expect(seen[1]).toBe("/cip?predictions=preds1&matrix=mat1&grid=0%3A1%3A0.1");
  });
});
