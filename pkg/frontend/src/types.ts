/** Shapes of the gateway JSON responses the explorer consumes. */

export type VariableId =
  | "x1" | "x2" | "x3" | "x4" | "x5"
  | "x6" | "x7" | "x8" | "x9" | "x10";

export interface VariableInfo {
  id: VariableId;
  description: string;
  unit: string;
  group: string;
  constant: boolean;
  discrete: boolean;
}

export interface ApiState {
  values: Record<VariableId, number>;
  time: number;
  image_id?: string;
}

export interface Intervention {
  target: VariableId;
  value: number;
  step?: number;
  persistent?: boolean;
}

export interface RolloutResponse {
  trajectory: ApiState[];
}

export interface CounterfactualResponse {
  target: VariableId;
  factual: number;
  counterfactual: number;
  delta: number;
}

export interface ClassifyResponse {
  probabilities: number[];
  classes: string[];
}

export interface HealthResponse {
  version: string;
  bundle_format: string;
  sim_config_hash: string;
}

export interface ApiErrorPayload {
  error: string;
  detail?: unknown;
  variable?: VariableId | null;
  id?: string;
}

/** What the user has configured but not yet submitted. */
export interface UiQueryState {
  baseline: Record<VariableId, number>;
  interventions: Intervention[];
  horizon: number;
  stepDt: number;
  persistent: boolean;
}
