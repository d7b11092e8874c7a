/** One-click flagship queries. Presets only construct query inputs
 * from the current baseline form; all predictions come from the API. */
import { Intervention, UiQueryState } from "./types";

export interface Preset {
  id: string;
  label: string;
  build(baseline: UiQueryState["baseline"]): Intervention[];
}

export const PRESETS: Preset[] = [
  {
    id: "raise-abeta",
    label: "Raise Aβ by 30%",
    build: (baseline) => [
      { target: "x5", value: baseline.x5 * 1.3, step: 0, persistent: true },
    ],
  },
  {
    id: "age-minus-5",
    label: "Age −5 years",
    build: (baseline) => [
      { target: "x1", value: baseline.x1 - 5, step: 0, persistent: true },
    ],
  },
];

export function applyPreset(q: UiQueryState, presetId: string): UiQueryState {
  const preset = PRESETS.find((p) => p.id === presetId);
  if (!preset) throw new Error(`unknown preset ${presetId}`);
  return { ...q, interventions: preset.build(q.baseline) };
}
