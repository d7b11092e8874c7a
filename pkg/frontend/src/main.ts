/** DOM wiring for the explorer page. All computation happens on the
 *  gateway; this file only reads form inputs, calls the controller, and
 *  renders the returned view model. */
import { GatewayClient } from "./api";
import { chartSvg } from "./chart";
import { ExplorerController, ViewModel } from "./controller";
import { applyPreset, PRESETS } from "./presets";
import { Intervention, UiQueryState, VariableId } from "./types";
import { VARIABLE_IDS } from "./validation";

const DEFAULT_BASELINE: Record<VariableId, number> = {
  x1: 72, x2: 1, x3: 14, x4: 1, x5: 180, x6: 28,
  x7: 26, x8: 1450, x9: 32, x10: 560,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

export function readQuery(root: Document): UiQueryState {
  const baseline = {} as Record<VariableId, number>;
  for (const v of VARIABLE_IDS) {
    const input = root.getElementById(`field-${v}`) as HTMLInputElement;
    baseline[v] = Number(input.value);
  }
  const horizon = Number((root.getElementById("horizon") as HTMLInputElement).value);
  const stepDt = Number((root.getElementById("step-dt") as HTMLInputElement).value);
  const persistent = (root.getElementById("persistent") as HTMLInputElement).checked;
  const target = (root.getElementById("iv-target") as HTMLSelectElement).value as VariableId;
  const value = Number((root.getElementById("iv-value") as HTMLInputElement).value);
  const interventions: Intervention[] =
    Number.isFinite(value) && target
      ? [{ target, value, step: 0, persistent }]
      : [];
  return { baseline, interventions, horizon, stepDt, persistent };
}

export function renderViewModel(vm: ViewModel, root: Document): void {
  const banner = root.getElementById("banner") as HTMLElement;
  const results = root.getElementById("results") as HTMLElement;
  banner.textContent = "";
  banner.className = "";
  for (const node of root.querySelectorAll(".field-error")) {
    node.textContent = "";
  }
  if (vm.status === "offline") {
    banner.textContent = "Gateway unreachable — is the server running?";
    banner.className = "banner-offline";
    return;
  }
  if (vm.status === "invalid") {
    for (const [field, message] of Object.entries(vm.fieldErrors ?? {})) {
      const slot = root.getElementById(`error-${field}`);
      if (slot) slot.textContent = message;
      else banner.textContent = `${field}: ${message}`;
    }
    if (banner.textContent === "" && vm.errorMessage) {
      banner.textContent = vm.errorMessage;
    }
    if (banner.textContent) banner.className = "banner-error";
    return;
  }
  if (vm.status === "error") {
    banner.textContent = vm.errorMessage ?? "request failed";
    banner.className = "banner-error";
    return;
  }
  if (vm.status !== "ready" || !vm.chart) return;
  results.hidden = false;
  (root.getElementById("chart") as HTMLElement).innerHTML = chartSvg(vm.chart);
  const setImg = (id: string, url?: string) => {
    const img = root.getElementById(id) as HTMLImageElement;
    if (url) { img.src = url; img.hidden = false; } else { img.hidden = true; }
  };
  setImg("img-factual", vm.factualImageUrl);
  setImg("img-counterfactual", vm.counterfactualImageUrl);
  setImg("img-diff", vm.diffImageUrl);
  const probs = root.getElementById("class-probs") as HTMLElement;
  if (vm.classes && vm.probabilities) {
    probs.textContent = vm.classes
      .map((c, i) => `${c}: ${(vm.probabilities![i] * 100).toFixed(1)}%`)
      .join("   ");
  } else {
    probs.textContent = "";
  }
}

export function wirePage(controller: ExplorerController, root: Document): void {
  const presetSelect = root.getElementById("preset") as HTMLSelectElement;
  for (const p of PRESETS) {
    const opt = root.createElement("option");
    opt.value = p.id;
    opt.textContent = p.label;
    presetSelect.appendChild(opt);
  }
  presetSelect.addEventListener("change", () => {
    const preset = PRESETS.find((p) => p.id === presetSelect.value);
    if (!preset) return;
    const next = applyPreset(readQuery(root), preset.id);
    const iv = next.interventions[0];
    if (iv) {
      (root.getElementById("iv-target") as HTMLSelectElement).value = iv.target;
      (root.getElementById("iv-value") as HTMLInputElement).value = String(iv.value);
      (root.getElementById("persistent") as HTMLInputElement).checked = iv.persistent ?? false;
    }
  });
  root.getElementById("run")!.addEventListener("click", async () => {
    const banner = root.getElementById("banner") as HTMLElement;
    banner.textContent = "running…";
    banner.className = "banner-progress";
    const vm = await controller.submit(readQuery(root));
    if (vm) renderViewModel(vm, root);
  });
}

export function bootstrap(): void {
  const form = el<HTMLElement>("baseline-fields");
  for (const v of VARIABLE_IDS) {
    const wrap = document.createElement("label");
    wrap.className = "field";
    wrap.innerHTML =
      `<span>${v}</span>` +
      `<input id="field-${v}" type="number" step="any" value="${DEFAULT_BASELINE[v]}">` +
      `<span class="field-error" id="error-${v}"></span>`;
    form.appendChild(wrap);
  }
  const client = new GatewayClient(
    (window as { GATEWAY_URL?: string }).GATEWAY_URL ?? "http://127.0.0.1:8000");
  wirePage(new ExplorerController(client), document);
}

if (typeof document !== "undefined" && document.getElementById("baseline-fields")) {
  bootstrap();
}
