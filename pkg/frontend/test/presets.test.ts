import { describe, expect, it } from "vitest";
import { applyPreset, PRESETS } from "../src/presets";
import { VALID_QUERY } from "./helpers";

describe("presets", () => {
  it("raise-abeta targets x5 at 1.3x the current baseline", () => {
    const q = applyPreset(VALID_QUERY, "raise-abeta");
    expect(q.interventions).toEqual([
      { target: "x5", value: VALID_QUERY.baseline.x5 * 1.3, step: 0, persistent: true },
    ]);
    expect(q.baseline).toEqual(VALID_QUERY.baseline);
  });

  it("age-minus-5 subtracts five years from baseline age", () => {
    const q = applyPreset(VALID_QUERY, "age-minus-5");
    expect(q.interventions).toEqual([
      { target: "x1", value: VALID_QUERY.baseline.x1 - 5, step: 0, persistent: true },
    ]);
  });

  it("every preset id is unique and applyPreset rejects unknown ids", () => {
    const ids = PRESETS.map((p) => p.id);
    expect(new Set(ids).size).toBe(ids.length);
    expect(() => applyPreset(VALID_QUERY, "nope")).toThrow(/unknown preset/);
  });
});
