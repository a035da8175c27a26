/**
 * Performance + fairness view: ground-truth binding, slicing controls,
 * per-slice threshold sliders, strategy buttons, and the metrics table.
 * Threshold changes re-fetch metrics from the service; the point cloud is
 * deliberately not linked to this tab.
 */
export const STRATEGIES = [
    "single",
    "group",
    "demographic-parity",
    "equal-opportunity",
    "equal-accuracy",
];
export class PerformanceViewModel {
    api;
    store;
    label = null;
    positive = null;
    sliceBy = [];
    costRatio = 1.0;
    epsilon = 0.01;
    /** per-model slider positions, written only from service responses */
    thresholds = {};
    tables = [];
    appliedStrategy = null;
    lastError = null;
    constructor(api, store) {
        this.api = api;
        this.store = store;
    }
    setBinding(label, positive) {
        this.label = label;
        this.positive = positive;
    }
    setSliceBy(features) {
        if (features.length > 2)
            throw new Error("slice by at most two features");
        this.sliceBy = features;
    }
    requireBinding() {
        if (!this.label || this.positive === null) {
            throw new Error("pick a ground-truth feature and positive value first");
        }
        return { label: this.label, positive: this.positive };
    }
    /** Load the table, optimizing a single threshold at the cost ratio. */
    async refresh() {
        const { label, positive } = this.requireBinding();
        this.lastError = null;
        try {
            const resp = await this.api.performance({
                label,
                positive,
                slice_by: this.sliceBy.join(",") || undefined,
                cost_ratio: this.costRatio,
            });
            if (!this.store.accept(resp.version))
                return;
            this.ingestPerformance(resp);
            this.appliedStrategy = null;
        }
        catch (e) {
            this.lastError = e instanceof Error ? e.message : String(e);
            throw e;
        }
    }
    /** Move one slider: re-fetch metrics at the edited per-slice thresholds. */
    async setThreshold(model, sliceKey, value) {
        const { label, positive } = this.requireBinding();
        const mine = { ...(this.thresholds[model] ?? {}), [sliceKey]: value };
        const resp = await this.api.performance({
            label,
            positive,
            slice_by: this.sliceBy.join(",") || undefined,
            cost_ratio: this.costRatio,
            thresholds: JSON.stringify(mine),
        });
        if (!this.store.accept(resp.version))
            return;
        const table = resp.models.find((m) => m.model === model);
        if (!table)
            return;
        this.thresholds[model] = Object.fromEntries(table.slices.map((s) => [s.slice_key, s.threshold]));
        const idx = this.tables.findIndex((t) => t.model === model);
        const entry = { model, slices: table.slices, roc: table.roc };
        if (idx >= 0)
            this.tables[idx] = entry;
        else
            this.tables.push(entry);
        this.appliedStrategy = null;
    }
    /** Apply a fairness strategy; sliders snap to the reported assignment. */
    async applyStrategy(strategy) {
        const { label, positive } = this.requireBinding();
        this.lastError = null;
        try {
            const resp = await this.api.fairness({
                strategy,
                label,
                positive,
                slice_by: this.sliceBy.join(",") || undefined,
                cost_ratio: this.costRatio,
                epsilon: this.epsilon,
            });
            if (!this.store.accept(resp.version))
                return;
            this.ingestFairness(resp);
            this.appliedStrategy = strategy;
        }
        catch (e) {
            this.lastError = e instanceof Error ? e.message : String(e);
            throw e;
        }
    }
    ingestPerformance(resp) {
        this.tables = resp.models.map((m) => ({
            model: m.model,
            slices: m.slices,
            roc: m.roc,
        }));
        for (const m of resp.models) {
            this.thresholds[m.model] = Object.fromEntries(m.slices.map((s) => [s.slice_key, s.threshold]));
        }
    }
    ingestFairness(resp) {
        this.tables = resp.models.map((m) => ({
            model: m.model,
            slices: m.slices,
            achievedDisparity: m.achieved_disparity,
            parityMet: m.parity_met,
        }));
        for (const m of resp.models) {
            this.thresholds[m.model] = Object.fromEntries(m.slices.map((s) => [s.slice_key, s.threshold]));
        }
    }
}
