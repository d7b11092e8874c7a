/** Query orchestration with latest-wins cancellation.
 *
 * A submit runs: factual rollout, counterfactual rollout, and a
 * classification of the counterfactual endpoint — all against the
 * gateway. A new submit aborts any in-flight one; only the latest
 * submission may update the view model.
 */
import { ApiError, GatewayClient, OfflineError } from "./api";
import { buildChartModel, ChartModel } from "./chart";
import { ApiState, ClassifyResponse, UiQueryState } from "./types";
import { FieldErrors, isValid, validateQuery } from "./validation";

export interface ViewModel {
  status: "idle" | "loading" | "ready" | "offline" | "invalid" | "error";
  chart?: ChartModel;
  factual?: ApiState[];
  counterfactual?: ApiState[];
  /** URLs of the final factual / counterfactual PNGs and their diff. */
  factualImageUrl?: string;
  counterfactualImageUrl?: string;
  diffImageUrl?: string;
  classes?: string[];
  probabilities?: number[];
  fieldErrors?: FieldErrors;
  errorMessage?: string;
}

export class ExplorerController {
  private inFlight: AbortController | null = null;
  private generation = 0;

  constructor(private readonly client: GatewayClient) {}

  /** Resolves to the view model for this submission, or null when a
   * newer submission superseded it. */
  async submit(q: UiQueryState): Promise<ViewModel | null> {
    const clientErrors = validateQuery(q);
    if (!isValid(q)) {
      return { status: "invalid", fieldErrors: clientErrors };
    }
    this.inFlight?.abort();
    const controller = new AbortController();
    this.inFlight = controller;
    const myGeneration = ++this.generation;
    const { signal } = controller;

    const baseline: ApiState = { values: { ...q.baseline }, time: 0 };
    try {
      const factual = await this.client.rollout(
        baseline, [], q.horizon, q.stepDt, true, signal);
      const counterfactual = await this.client.rollout(
        baseline, q.interventions, q.horizon, q.stepDt, true, signal);
      const cfLast = counterfactual.trajectory[
        counterfactual.trajectory.length - 1];
      const fLast = factual.trajectory[factual.trajectory.length - 1];
      let classified: ClassifyResponse | undefined;
      classified = await this.client.classify(
        { values: cfLast.values, time: cfLast.time,
          image_id: cfLast.image_id }, signal);
      if (myGeneration !== this.generation) return null;
      const vm: ViewModel = {
        status: "ready",
        factual: factual.trajectory,
        counterfactual: counterfactual.trajectory,
        chart: buildChartModel(factual.trajectory, counterfactual.trajectory),
        classes: classified?.classes,
        probabilities: classified?.probabilities,
      };
      if (fLast.image_id && cfLast.image_id) {
        vm.factualImageUrl = this.client.imageUrl(fLast.image_id);
        vm.counterfactualImageUrl = this.client.imageUrl(cfLast.image_id);
        vm.diffImageUrl = this.client.diffUrl(cfLast.image_id, fLast.image_id);
      }
      return vm;
    } catch (err) {
      if ((err as Error)?.name === "AbortError") return null;
      if (myGeneration !== this.generation) return null;
      if (err instanceof OfflineError) return { status: "offline" };
      if (err instanceof ApiError && err.status === 422) {
        const fieldErrors: FieldErrors = {};
        const variable = err.payload.variable;
        if (variable) fieldErrors[variable] = String(err.payload.detail ?? "invalid value");
        return {
          status: "invalid",
          fieldErrors,
          errorMessage: String(err.payload.detail ?? err.message),
        };
      }
      if (err instanceof ApiError) {
        return { status: "error", errorMessage: err.message };
      }
      throw err;
    }
  }
}
