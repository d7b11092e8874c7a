import { describe, expect, it } from "vitest";
import { buildChartModel, CHART_VARIABLES, chartSvg } from "../src/chart";
import { makeState } from "./helpers";

const F = [makeState({ x10: 560 }, 0), makeState({ x10: 550 }, 1), makeState({ x10: 541 }, 2)];
const C = [makeState({ x10: 560 }, 0), makeState({ x10: 556 }, 1), makeState({ x10: 553 }, 2)];

describe("trajectory chart model", () => {
  it("copies y values verbatim from the API trajectories", () => {
    const model = buildChartModel(F, C);
    for (const panel of model.panels) {
      const f = panel.series.find((s) => s.kind === "factual")!;
      const c = panel.series.find((s) => s.kind === "counterfactual")!;
      expect(f.points.map((p) => p[1])).toEqual(F.map((s) => s.values[panel.variable]));
      expect(c.points.map((p) => p[1])).toEqual(C.map((s) => s.values[panel.variable]));
      expect(f.points.map((p) => p[0])).toEqual([0, 1, 2]);
    }
  });

  it("renders one panel per plotted variable", () => {
    const model = buildChartModel(F, C);
    expect(model.panels.map((p) => p.variable)).toEqual(CHART_VARIABLES);
  });

  it("produces coinciding paths when counterfactual equals factual", () => {
    const model = buildChartModel(F, F.map((s) => ({ ...s })));
    for (const panel of model.panels) {
      const [a, b] = panel.series;
      expect(a.path).toBe(b.path);
      expect(a.dashed).toBe(false);
      expect(b.dashed).toBe(true);
    }
  });

  it("diverging counterfactual yields a different path", () => {
    const model = buildChartModel(F, C);
    const panel = model.panels.find((p) => p.variable === "x10")!;
    expect(panel.series[0].path).not.toBe(panel.series[1].path);
  });

  it("emits SVG with identifiable series and line styles", () => {
    const svg = chartSvg(buildChartModel(F, C));
    expect(svg).toContain('data-series="x10-factual"');
    expect(svg).toContain('data-series="x10-counterfactual"');
    expect(svg).toContain("stroke-dasharray");
    expect(svg.startsWith("<svg")).toBe(true);
  });
});
