/** SVG trajectory chart: one panel per plotted variable, factual curve
 * solid and counterfactual dashed. Pure presentation — y values are
 * copied verbatim from the gateway trajectories. */
import { ApiState, VariableId } from "./types";

export const CHART_VARIABLES: VariableId[] = ["x10", "x9", "x8"];

export interface Series {
  variable: VariableId;
  kind: "factual" | "counterfactual";
  /** [time (years), value] pairs exactly as returned by the API. */
  points: Array<[number, number]>;
  /** SVG path in chart coordinates. */
  path: string;
  dashed: boolean;
}

export interface ChartModel {
  width: number;
  height: number;
  panels: Array<{ variable: VariableId; series: Series[] }>;
}

function pathFor(
  points: Array<[number, number]>,
  tMin: number,
  tMax: number,
  yMin: number,
  yMax: number,
  width: number,
  height: number,
): string {
  const sx = (t: number) =>
    tMax === tMin ? 0 : ((t - tMin) / (tMax - tMin)) * width;
  const sy = (y: number) =>
    yMax === yMin ? height / 2 : height - ((y - yMin) / (yMax - yMin)) * height;
  return points
    .map(([t, y], i) => `${i === 0 ? "M" : "L"}${sx(t).toFixed(2)},${sy(y).toFixed(2)}`)
    .join(" ");
}

export function buildChartModel(
  factual: ApiState[],
  counterfactual: ApiState[],
  width = 260,
  height = 120,
): ChartModel {
  const panels = CHART_VARIABLES.map((variable) => {
    const fPts: Array<[number, number]> = factual.map((s) => [
      s.time,
      s.values[variable],
    ]);
    const cPts: Array<[number, number]> = counterfactual.map((s) => [
      s.time,
      s.values[variable],
    ]);
    const all = [...fPts, ...cPts];
    const tMin = Math.min(...all.map((p) => p[0]));
    const tMax = Math.max(...all.map((p) => p[0]));
    const yMin = Math.min(...all.map((p) => p[1]));
    const yMax = Math.max(...all.map((p) => p[1]));
    const series: Series[] = [
      {
        variable,
        kind: "factual",
        points: fPts,
        path: pathFor(fPts, tMin, tMax, yMin, yMax, width, height),
        dashed: false,
      },
      {
        variable,
        kind: "counterfactual",
        points: cPts,
        path: pathFor(cPts, tMin, tMax, yMin, yMax, width, height),
        dashed: true,
      },
    ];
    return { variable, series };
  });
  return { width, height, panels };
}

export function chartSvg(model: ChartModel): string {
  const panels = model.panels
    .map((panel, i) => {
      const lines = panel.series
        .map(
          (s) =>
            `<path d="${s.path}" fill="none" ` +
            `stroke="${s.kind === "factual" ? "#1a6" : "#c33"}" ` +
            `${s.dashed ? 'stroke-dasharray="6 4" ' : ""}stroke-width="2" ` +
            `data-series="${panel.variable}-${s.kind}"/>`,
        )
        .join("");
      return (
        `<g transform="translate(0,${i * (model.height + 24)})">` +
        `<text x="0" y="12" font-size="11">${panel.variable}</text>` +
        `<g transform="translate(0,16)">${lines}</g></g>`
      );
    })
    .join("");
  const total = model.panels.length * (model.height + 24);
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${model.width}" ` +
    `height="${total}" viewBox="0 0 ${model.width} ${total}">${panels}</svg>`
  );
}
