import { describe, expect, it } from "vitest";
import { GatewayClient } from "../src/api";
import { ExplorerController } from "../src/controller";
import { UiQueryState } from "../src/types";
import { jsonResponse, makeState, RecordedCall, routedFetch, VALID_QUERY } from "./helpers";

const BASE = "http://gw:8000";

// Sentinel numbers no client-side computation could produce: the only way
// they can appear in the view model is by reading the mocked HTTP responses.
const FACTUAL_END = makeState({ x10: 123.456 }, 2, "img-factual");
const COUNTER_END = makeState({ x10: 654.321 }, 2, "img-counter");
const PROBS = [0.111, 0.222, 0.667];

function build(calls: RecordedCall[], routes?: Parameters<typeof routedFetch>[0]) {
  const fetchFn = routedFetch(
    routes ?? {
      "/api/rollout": (body) => {
        const q = (body as { query: { interventions: unknown[] } }).query;
        const end = q.interventions.length === 0 ? FACTUAL_END : COUNTER_END;
        return jsonResponse({ trajectory: [makeState({}, 0, "img-base"), end] });
      },
      "/api/classify": () =>
        jsonResponse({ probabilities: PROBS, classes: ["NC", "MCI", "AD"] }),
    },
    calls,
  );
  return new ExplorerController(new GatewayClient(BASE, fetchFn));
}

const QUERY: UiQueryState = {
  ...VALID_QUERY,
  interventions: [{ target: "x5", value: 234, step: 0, persistent: true }],
};

describe("explorer controller", () => {
  it("performs no local inference: every displayed number is a response value", async () => {
    const calls: RecordedCall[] = [];
    const vm = await build(calls).submit(QUERY);
    expect(vm?.status).toBe("ready");
    // exactly three API calls: factual rollout, counterfactual rollout, classify
    expect(calls.map((c) => c.url)).toEqual([
      `${BASE}/api/rollout`,
      `${BASE}/api/rollout`,
      `${BASE}/api/classify`,
    ]);
    // trajectory endpoints are verbatim the mocked sentinels
    expect(vm?.factual?.[1].values.x10).toBe(123.456);
    expect(vm?.counterfactual?.[1].values.x10).toBe(654.321);
    expect(vm?.probabilities).toEqual(PROBS);
    expect(vm?.classes).toEqual(["NC", "MCI", "AD"]);
    // chart y values are copies of the response values, not recomputed
    const panel = vm!.chart!.panels.find((p) => p.variable === "x10")!;
    expect(panel.series[0].points[1][1]).toBe(123.456);
    expect(panel.series[1].points[1][1]).toBe(654.321);
    // image URLs point at the gateway using response-provided ids
    expect(vm?.factualImageUrl).toBe(`${BASE}/api/image/img-factual.png`);
    expect(vm?.counterfactualImageUrl).toBe(`${BASE}/api/image/img-counter.png`);
    expect(vm?.diffImageUrl).toBe(`${BASE}/api/diff/img-counter/img-factual.png`);
  });

  it("classifies the counterfactual endpoint state returned by the gateway", async () => {
    const calls: RecordedCall[] = [];
    await build(calls).submit(QUERY);
    const classifyBody = calls[2].body as { state: { values: { x10: number }, image_id?: string } };
    expect(classifyBody.state.values.x10).toBe(654.321);
    expect(classifyBody.state.image_id).toBe("img-counter");
  });

  it("does not call the network at all for an invalid query", async () => {
    const calls: RecordedCall[] = [];
    const vm = await build(calls).submit({
      ...QUERY,
      baseline: { ...QUERY.baseline, x2: 7 },
    });
    expect(vm?.status).toBe("invalid");
    expect(vm?.fieldErrors?.x2).toMatch(/0 or 1/);
    expect(calls).toHaveLength(0);
  });

  it("latest submission wins: superseded submit resolves null", async () => {
    const calls: RecordedCall[] = [];
    let release: (() => void) | undefined;
    const gate = new Promise<void>((r) => { release = r; });
    const controller = build(calls, {
      "/api/rollout": async (body) => {
        const q = (body as { query: { interventions: unknown[] } }).query;
        if (calls.length === 1) await gate; // stall the first factual rollout
        const end = q.interventions.length === 0 ? FACTUAL_END : COUNTER_END;
        return jsonResponse({ trajectory: [makeState({}, 0), end] });
      },
      "/api/classify": () =>
        jsonResponse({ probabilities: PROBS, classes: ["NC", "MCI", "AD"] }),
    });
    const first = controller.submit(QUERY);
    const second = controller.submit(QUERY);
    const [vm1, vm2] = await Promise.all([first, second]);
    release?.();
    expect(vm1).toBeNull();
    expect(vm2?.status).toBe("ready");
    expect(vm2?.counterfactual?.[1].values.x10).toBe(654.321);
  });

  it("maps network failure to the offline view state", async () => {
    const controller = new ExplorerController(
      new GatewayClient(BASE, () => Promise.reject(new TypeError("ECONNREFUSED"))),
    );
    const vm = await controller.submit(QUERY);
    expect(vm?.status).toBe("offline");
  });

  it("maps a 422 domain violation onto the offending field", async () => {
    const calls: RecordedCall[] = [];
    const controller = build(calls, {
      "/api/rollout": () =>
        jsonResponse(
          { error: "domain_violation", detail: "x2 must be 0 or 1", variable: "x2" },
          422,
        ),
    });
    const vm = await controller.submit(QUERY);
    expect(vm?.status).toBe("invalid");
    expect(vm?.fieldErrors?.x2).toBe("x2 must be 0 or 1");
  });

  it("surfaces other HTTP errors as a generic error state", async () => {
    const calls: RecordedCall[] = [];
    const controller = build(calls, {
      "/api/rollout": () => jsonResponse({ error: "bundle_missing" }, 500),
    });
    const vm = await controller.submit(QUERY);
    expect(vm?.status).toBe("error");
    expect(vm?.errorMessage).toMatch(/bundle_missing/);
  });
});
