/** Typed gateway client. The explorer performs no inference locally:
 * every number it displays is read from one of these responses. */
import {
  ApiErrorPayload,
  ApiState,
  ClassifyResponse,
  CounterfactualResponse,
  HealthResponse,
  Intervention,
  RolloutResponse,
  VariableId,
  VariableInfo,
} from "./types";

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly payload: ApiErrorPayload,
  ) {
    super(`${payload.error} (${status})`);
  }
}

/** Network-level failure (server unreachable); shown as the offline banner. */
export class OfflineError extends Error {
  constructor(public readonly reason: unknown) {
    super("gateway unreachable");
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class GatewayClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...a) => fetch(...a),
  ) {}

  private async request<T>(
    path: string,
    body?: unknown,
    signal?: AbortSignal,
  ): Promise<T> {
    let res: Response;
    try {
      res = await this.fetchFn(this.baseUrl + path, {
        method: body === undefined ? "GET" : "POST",
        headers: body === undefined ? {} : { "content-type": "application/json" },
        body: body === undefined ? undefined : JSON.stringify(body),
        signal,
      });
    } catch (err) {
      if ((err as Error)?.name === "AbortError") throw err;
      throw new OfflineError(err);
    }
    const payload = await res.json();
    if (!res.ok) throw new ApiError(res.status, payload as ApiErrorPayload);
    return payload as T;
  }

  health(): Promise<HealthResponse> {
    return this.request("/api/health");
  }

  variables(): Promise<VariableInfo[]> {
    return this.request("/api/variables");
  }

  predict(
    state: ApiState,
    dt: number,
    interventions: Intervention[] = [],
    signal?: AbortSignal,
  ): Promise<{ state: ApiState }> {
    return this.request("/api/predict", { state, dt, interventions }, signal);
  }

  rollout(
    baseline: ApiState,
    interventions: Intervention[],
    horizon: number,
    stepDt: number,
    withImages: boolean,
    signal?: AbortSignal,
  ): Promise<RolloutResponse> {
    return this.request(
      "/api/rollout",
      {
        query: {
          baseline,
          interventions,
          horizon,
          step_dt: stepDt,
        },
        with_images: withImages,
      },
      signal,
    );
  }

  counterfactual(
    state: ApiState,
    intervention: Intervention,
    target: VariableId,
    dt: number,
    signal?: AbortSignal,
  ): Promise<CounterfactualResponse> {
    return this.request(
      "/api/counterfactual",
      { state, intervention, target, dt },
      signal,
    );
  }

  classify(state: ApiState, signal?: AbortSignal): Promise<ClassifyResponse> {
    return this.request("/api/classify", { state }, signal);
  }

  imageUrl(imageId: string): string {
    return `${this.baseUrl}/api/image/${imageId}.png`;
  }

  diffUrl(idA: string, idB: string): string {
    return `${this.baseUrl}/api/diff/${idA}/${idB}.png`;
  }
}
