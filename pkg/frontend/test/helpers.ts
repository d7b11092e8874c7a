/** Shared fetch mocks. Each mock records every request so tests can
 *  prove all displayed numbers come from HTTP responses. */
import { FetchLike } from "../src/api";
import { ApiState } from "../src/types";

export interface RecordedCall {
  url: string;
  method: string;
  body: unknown;
}

export function jsonResponse(payload: unknown, status = 200): Response {
  return {
    ok: status >= 200 && status < 300,
    status,
    json: async () => payload,
  } as unknown as Response;
}

export function abortError(): Error {
  const err = new Error("aborted");
  err.name = "AbortError";
  return err;
}

/** fetch stub routing on URL suffix; aborts in-flight promises when the
 *  request signal fires. */
export function routedFetch(
  routes: Record<string, (body: unknown) => Response | Promise<Response>>,
  calls: RecordedCall[],
): FetchLike {
  return (url, init) => {
    const body = init?.body ? JSON.parse(init.body as string) : undefined;
    calls.push({ url, method: init?.method ?? "GET", body });
    const route = Object.keys(routes).find((suffix) => url.includes(suffix));
    if (!route) return Promise.reject(new Error(`no route for ${url}`));
    const signal = init?.signal;
    if (signal?.aborted) return Promise.reject(abortError());
    return new Promise<Response>((resolve, reject) => {
      signal?.addEventListener("abort", () => reject(abortError()));
      Promise.resolve(routes[route](body)).then(resolve, reject);
    });
  };
}

export function makeState(
  overrides: Partial<Record<string, number>> = {},
  time = 0,
  imageId?: string,
): ApiState {
  const values: Record<string, number> = {
    x1: 72, x2: 1, x3: 14, x4: 1, x5: 180, x6: 28,
    x7: 26, x8: 1450, x9: 32, x10: 560,
    ...overrides,
  };
  return {
    values: values as ApiState["values"],
    time,
    ...(imageId ? { image_id: imageId } : {}),
  };
}

export const VALID_QUERY = {
  baseline: makeState().values,
  interventions: [],
  horizon: 2,
  stepDt: 1,
  persistent: true,
};
