/**
 * Workbench entry point: three tabs (Datapoint Editor, Performance +
 * Fairness, Features) over the analysis service. Configuration is limited
 * to the API base URL via window.MODELPROBE_API (default: same origin).
 */

import { ApiClient, SessionInfo } from "./api.js";
import { barChart, clear, el, formatNumber, lineChart } from "./dom.js";
import { EditorViewModel, defaultBinning } from "./editor.js";
import { FeaturesViewModel } from "./features.js";
import { PerformanceViewModel, STRATEGIES } from "./performance.js";
import { SessionStore } from "./store.js";

declare global {
  interface Window {
    MODELPROBE_API?: string;
  }
}

const TABS = ["Datapoint Editor", "Performance + Fairness", "Features"] as const;

async function boot(): Promise<void> {
  const root = document.getElementById("app");
  if (!root) return;
  const api = new ApiClient(window.MODELPROBE_API ?? "");
  const store = new SessionStore();
  let session: SessionInfo;
  try {
    session = await api.session();
  } catch (e) {
    root.append(el("p", { class: "error" }, [`service unreachable: ${String(e)}`]));
    return;
  }
  if (!session.dataset) {
    root.append(el("p", { class: "error" }, ["no dataset loaded; start the service with --dataset"]));
    return;
  }

  const editor = new EditorViewModel(api, store, session);
  const perf = new PerformanceViewModel(api, store);
  const features = new FeaturesViewModel(api, store, session.dataset.id);

  const tabBar = el("nav", { class: "tabs" });
  const panel = el("main", { class: "panel" });
  root.append(tabBar, panel);

  const renderers: Record<string, () => Promise<void>> = {
    "Datapoint Editor": () => renderEditor(panel, editor, session),
    "Performance + Fairness": () => renderPerformance(panel, perf, session),
    Features: () => renderFeatures(panel, features),
  };

  for (const name of TABS) {
    const btn = el("button", { class: "tab" }, [name]);
    btn.addEventListener("click", () => {
      clear(panel);
      renderers[name]().catch((e) => showError(panel, e));
    });
    tabBar.append(btn);
  }
  await renderers["Datapoint Editor"]();
}

function showError(panel: HTMLElement, e: unknown): void {
  panel.prepend(el("p", { class: "error" }, [e instanceof Error ? e.message : String(e)]));
}

async function renderEditor(
  panel: HTMLElement,
  vm: EditorViewModel,
  session: SessionInfo,
): Promise<void> {
  clear(panel);
  const left = el("section", { class: "left" });
  const right = el("section", { class: "right" });
  panel.append(left, right);

  const pointInput = el("input", { type: "number", value: "0", class: "point-id" });
  const selectBtn = el("button", {}, ["Select point"]);
  left.append(el("div", {}, [pointInput, selectBtn]));

  const valueTable = el("table", { class: "values" });
  const scoreBox = el("div", { class: "scores" });
  const cfBtn = el("button", {}, ["Toggle nearest counterfactual"]);
  const reinferBtn = el("button", { class: "primary" }, ["Re-infer"]);
  const pdpBox = el("div", { class: "pdp" });
  left.append(valueTable, reinferBtn, scoreBox, cfBtn, pdpBox);

  const cloud = el("div", { class: "cloud" });
  right.append(cloud);

  const redrawValues = () => {
    clear(valueTable);
    if (!vm.selected) return;
    const differing = new Set(vm.differingFeatures());
    for (const [feature, value] of Object.entries(vm.edits)) {
      const input = el("input", { value: value === null ? "" : String(value) });
      input.addEventListener("change", () => {
        const kind = session.dataset!.schema.find((f) => f.name === feature)?.kind;
        const raw = input.value.trim();
        vm.setValue(feature, raw === "" ? null : kind === "numeric" ? Number(raw) : raw);
      });
      const match = vm.counterfactual?.deltas?.find((d) => d.feature === feature);
      const row = el("tr", { class: differing.has(feature) ? "differs" : "" }, [
        el("td", {}, [feature]),
        el("td", {}, [input]),
        el("td", { class: "cf" }, [
          vm.counterfactualShown && match ? String(match.match ?? "(missing)") : "",
        ]),
      ]);
      valueTable.append(row);
    }
  };

  const redrawScores = () => {
    clear(scoreBox);
    for (const s of vm.scores) {
      const arrow = s.direction === "up" ? "↑" : s.direction === "down" ? "↓" : "→";
      const delta =
        s.delta === null ? "" : ` ${arrow} ${formatNumber(s.delta as number)}`;
      scoreBox.append(
        el("div", { class: `score ${s.model}` }, [
          `${s.model}: ${formatNumber(s.output as number)}${delta}`,
        ]),
      );
    }
  };

  const redrawPdp = () => {
    clear(pdpBox);
    for (const curve of vm.pdpCurves) {
      pdpBox.append(
        el("h4", {}, [`partial dependence: ${curve.feature}`]),
        lineChart(
          curve.series.map((s) => ({ name: s.model, ys: s.ys })),
          300,
          100,
          Object.values(curve.thresholds),
        ),
      );
    }
  };

  const redrawCloud = () => {
    clear(cloud);
    if (!vm.binning) return;
    const counts = new Map<string, number>();
    for (const p of vm.binning.points) {
      const key = `${p.x}|${p.y}`;
      counts.set(key, (counts.get(key) ?? 0) + 1);
    }
    cloud.append(
      el("h4", {}, [
        `binned by ${vm.binning.x?.feature ?? "-"} x ${vm.binning.y?.feature ?? "-"}`,
      ]),
      barChart(
        [...counts.entries()].map(([label, value]) => ({ label, value })),
        420,
        140,
      ),
    );
  };

  selectBtn.addEventListener("click", async () => {
    await vm.select(Number(pointInput.value));
    redrawValues();
    redrawScores();
  });
  reinferBtn.addEventListener("click", async () => {
    await vm.reinfer().catch((e) => showError(panel, e));
    redrawValues();
    redrawScores();
  });
  cfBtn.addEventListener("click", async () => {
    await vm.toggleCounterfactual();
    redrawValues();
  });

  const pdpSelect = el("select", {});
  for (const f of session.dataset!.schema) {
    pdpSelect.append(el("option", { value: f.name }, [f.name]));
  }
  const pdpBtn = el("button", {}, ["Chart partial dependence"]);
  pdpBtn.addEventListener("click", async () => {
    await vm.loadPdp((pdpSelect as HTMLSelectElement).value).catch((e) => showError(panel, e));
    redrawPdp();
  });
  left.append(pdpSelect, pdpBtn);

  await vm.select(0).catch((e) => showError(panel, e));
  await vm.loadBins(defaultBinning(session)).catch((e) => showError(panel, e));
  redrawValues();
  redrawScores();
  redrawCloud();
}

async function renderPerformance(
  panel: HTMLElement,
  vm: PerformanceViewModel,
  session: SessionInfo,
): Promise<void> {
  clear(panel);
  const controls = el("section", { class: "left" });
  const tableBox = el("section", { class: "right" });
  panel.append(controls, tableBox);

  const labelSelect = el("select", {});
  for (const f of session.dataset!.schema) {
    labelSelect.append(el("option", { value: f.name }, [f.name]));
  }
  const positiveInput = el("input", { placeholder: "positive value", value: "1" });
  const sliceInput = el("input", { placeholder: "slice by (f1 or f1,f2)" });
  const ratioInput = el("input", { type: "number", step: "0.25", value: "1" });
  const loadBtn = el("button", { class: "primary" }, ["Load performance"]);
  controls.append(
    el("div", {}, ["ground truth: ", labelSelect, positiveInput]),
    el("div", {}, ["slice by: ", sliceInput]),
    el("div", {}, ["cost ratio: ", ratioInput]),
    loadBtn,
  );

  const strategyBox = el("div", { class: "strategies" });
  for (const s of STRATEGIES) {
    const btn = el("button", {}, [s]);
    btn.addEventListener("click", async () => {
      await vm.applyStrategy(s).catch((e) => showError(panel, e));
      redraw();
    });
    strategyBox.append(btn);
  }
  controls.append(strategyBox);

  const redraw = () => {
    clear(tableBox);
    for (const table of vm.tables) {
      const heading = el("h3", {}, [
        table.model +
          (table.achievedDisparity != null
            ? ` (disparity ${formatNumber(table.achievedDisparity)}${table.parityMet ? ", parity met" : ""})`
            : ""),
      ]);
      tableBox.append(heading);
      if (table.roc) {
        tableBox.append(
          el("p", {}, [`AUC ${formatNumber(table.roc.auc)}`]),
          lineChart([{ name: "roc", ys: table.roc.points.map((p) => p[1]) }], 220, 90),
        );
      }
      const t = el("table", { class: "slices" });
      t.append(
        el("tr", {}, [
          el("th", {}, ["slice"]),
          el("th", {}, ["count"]),
          el("th", {}, ["threshold"]),
          el("th", {}, ["confusion tp/fp/tn/fn"]),
          el("th", {}, ["accuracy"]),
        ]),
      );
      for (const row of table.slices) {
        const slider = el("input", {
          type: "range",
          min: "0",
          max: "1",
          step: "0.001",
          value: String(row.threshold),
          class: `slider-${table.model}`,
          "data-slice": row.slice_key,
        });
        slider.addEventListener("change", async () => {
          await vm
            .setThreshold(table.model, row.slice_key, Number((slider as HTMLInputElement).value))
            .catch((e) => showError(panel, e));
          redraw();
        });
        const c = row.confusion;
        // error cells (fp, fn) emphasized by opacity elsewhere in CSS
        t.append(
          el("tr", {}, [
            el("td", {}, [row.slice_key]),
            el("td", {}, [String(row.count)]),
            el("td", {}, [slider, formatNumber(row.threshold)]),
            el("td", { class: "confusion" }, [`${c.tp}/${c.fp}/${c.tn}/${c.fn}`]),
            el("td", {}, [formatNumber(row.accuracy)]),
          ]),
        );
      }
      tableBox.append(t);
    }
  };

  loadBtn.addEventListener("click", async () => {
    vm.setBinding((labelSelect as HTMLSelectElement).value, (positiveInput as HTMLInputElement).value);
    vm.setSliceBy(
      (sliceInput as HTMLInputElement).value
        .split(",")
        .map((s) => s.trim())
        .filter(Boolean),
    );
    vm.costRatio = Number((ratioInput as HTMLInputElement).value) || 1.0;
    await vm.refresh().catch((e) => showError(panel, e));
    redraw();
  });
}

async function renderFeatures(panel: HTMLElement, vm: FeaturesViewModel): Promise<void> {
  clear(panel);
  const bar = el("div", { class: "controls" });
  const sortSelect = el("select", {}, []);
  for (const s of ["non-uniformity", "missing", "alpha"]) {
    sortSelect.append(el("option", { value: s }, [s]));
  }
  const tableToggle = el("button", {}, ["chart/table"]);
  const logToggle = el("button", {}, ["linear/log"]);
  const list = el("div", { class: "features" });
  bar.append("sort: ", sortSelect, tableToggle, logToggle);
  panel.append(bar, list);

  const redraw = () => {
    clear(list);
    for (const name of vm.order) {
      const s = vm.stats[name];
      const head = el("h4", {}, [
        `${name} (${s.kind}, ${s.distinct} distinct, ${s.missing} missing, non-uniformity ${formatNumber(s.non_uniformity)})`,
      ]);
      list.append(head);
      if (s.kind === "numeric") {
        list.append(
          el("p", {}, [
            `min ${formatNumber(s.min!)} / mean ${formatNumber(s.mean!)} / max ${formatNumber(s.max!)} / std ${formatNumber(s.std!)} / zeros ${s.zeros}`,
          ]),
        );
      } else {
        list.append(el("p", {}, [`most frequent: ${s.most_frequent}`]));
      }
      const series = vm
        .chartSeries(name)
        .map((p) => (vm.logScale ? { ...p, value: Math.log1p(p.value) } : p));
      if (vm.showAsTable) {
        const t = el("table", { class: "dist" });
        for (const p of vm.chartSeries(name)) {
          t.append(el("tr", {}, [el("td", {}, [p.label]), el("td", {}, [formatNumber(p.value)])]));
        }
        list.append(t);
      } else if (s.display_mode === "histogram") {
        list.append(barChart(series));
      } else {
        list.append(lineChart([{ name, ys: series.map((p) => p.value) }], 260, 80));
      }
    }
  };

  sortSelect.addEventListener("change", async () => {
    await vm.setSort((sortSelect as HTMLSelectElement).value as never);
    redraw();
  });
  tableToggle.addEventListener("click", () => {
    vm.toggleTable();
    redraw();
  });
  logToggle.addEventListener("click", () => {
    vm.toggleLogScale();
    redraw();
  });

  await vm.refresh();
  redraw();
}

boot().catch((e) => {
  document.body.append(el("p", { class: "error" }, [String(e)]));
});
