/** Client-side form validation mirroring the gateway's variable
 * domains, so the submit button is enabled exactly for requests the
 * gateway would accept on its 200 path. */
import { UiQueryState, VariableId } from "./types";

export const VARIABLE_IDS: VariableId[] = [
  "x1", "x2", "x3", "x4", "x5", "x6", "x7", "x8", "x9", "x10",
];

/** Strictly-positive biomarker and volume variables. */
const POSITIVE: VariableId[] = ["x5", "x6", "x7", "x8", "x9", "x10"];

export function validateValue(id: VariableId, value: number): string | null {
  if (!Number.isFinite(value)) return "must be a finite number";
  if (id === "x2" && value !== 0 && value !== 1) return "must be 0 or 1";
  if (id === "x4" && ![0, 1, 2].includes(value)) return "must be 0, 1 or 2";
  if (POSITIVE.includes(id) && value <= 0) return "must be > 0";
  return null;
}

export type FieldErrors = Partial<Record<VariableId | "horizon" | "stepDt", string>>;

export function validateQuery(q: UiQueryState): FieldErrors {
  const out: FieldErrors = {};
  for (const id of VARIABLE_IDS) {
    if (!(id in q.baseline)) {
      out[id] = "required";
      continue;
    }
    const err = validateValue(id, q.baseline[id]);
    if (err) out[id] = err;
  }
  for (const iv of q.interventions) {
    const err = validateValue(iv.target, iv.value);
    if (err) out[iv.target] = `intervention ${err}`;
  }
  if (!Number.isInteger(q.horizon) || q.horizon < 1) out.horizon = "must be >= 1";
  if (!(q.stepDt > 0)) out.stepDt = "must be > 0";
  return out;
}

export function isValid(q: UiQueryState): boolean {
  return Object.keys(validateQuery(q)).length === 0;
}
