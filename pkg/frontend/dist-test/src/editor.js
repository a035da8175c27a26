/**
 * Datapoint editor: select a point, edit feature values, re-infer with
 * deltas, toggle the nearest counterfactual, chart partial dependence, and
 * drive the point-cloud binning. All numbers come from the service.
 */
/** Default point-cloud view: two binary models compare scores on a scatter. */
export function defaultBinning(session) {
    const task = session.models[0]?.task.type;
    if (session.comparison_mode && (task === "binary" || task === "regression")) {
        return { x: "model1_score", y: "model2_score" };
    }
    if (task === "binary" || task === "regression") {
        return { y: "model1_score" };
    }
    return {};
}
export class EditorViewModel {
    api;
    store;
    session;
    selected = null;
    /** live edit buffer; committed by reinfer() */
    edits = {};
    scores = [];
    counterfactual = null;
    counterfactualShown = false;
    pdpCurves = [];
    binning = null;
    lastError = null;
    constructor(api, store, session) {
        this.api = api;
        this.store = store;
        this.session = session;
    }
    datasetId() {
        if (!this.session.dataset)
            throw new Error("no dataset loaded");
        return this.session.dataset.id;
    }
    models() {
        return this.session.models.map((m) => m.slot);
    }
    async select(pointId) {
        const page = await this.api.points(this.datasetId(), 0, this.session.dataset.n_points);
        if (!this.store.accept(page.version))
            return;
        const point = page.points.find((p) => p.id === pointId);
        if (!point)
            throw new Error(`point ${pointId} not found`);
        this.selected = point;
        this.edits = { ...point.values };
        this.counterfactual = null;
        this.counterfactualShown = false;
        await this.refreshScores();
    }
    setValue(feature, value) {
        if (!this.selected)
            throw new Error("no point selected");
        if (!(feature in this.edits))
            throw new Error(`unknown feature ${feature}`);
        this.edits[feature] = value;
    }
    dirtyChanges() {
        const out = {};
        if (!this.selected)
            return out;
        for (const [k, v] of Object.entries(this.edits)) {
            if (this.selected.values[k] !== v)
                out[k] = v;
        }
        return out;
    }
    /** Commit edits and re-infer; scores update with delta and direction. */
    async reinfer() {
        if (!this.selected)
            throw new Error("no point selected");
        this.lastError = null;
        try {
            const changes = this.dirtyChanges();
            if (Object.keys(changes).length > 0) {
                const edited = await this.api.editPoint(this.datasetId(), this.selected.id, changes);
                this.store.advanceTo(edited.version);
                this.selected = edited.point;
                this.edits = { ...edited.point.values };
            }
            await this.refreshScores();
            if (this.counterfactualShown)
                await this.loadCounterfactual();
        }
        catch (e) {
            this.lastError = e instanceof Error ? e.message : String(e);
            throw e;
        }
    }
    async refreshScores() {
        if (!this.selected)
            return;
        const rows = [];
        for (const model of this.models()) {
            const resp = await this.api.predictByIds(model, [this.selected.id]);
            if (!this.store.accept(resp.version))
                return;
            const row = resp.predictions[0];
            rows.push({ model, output: row.output, delta: row.delta, direction: row.direction });
        }
        this.scores = rows;
    }
    async toggleCounterfactual() {
        this.counterfactualShown = !this.counterfactualShown;
        if (this.counterfactualShown) {
            await this.loadCounterfactual();
        }
        else {
            this.counterfactual = null;
        }
    }
    async loadCounterfactual() {
        if (!this.selected)
            return;
        const resp = await this.api.counterfactual(this.selected.id);
        if (!this.store.accept(resp.version))
            return;
        this.counterfactual = resp;
    }
    /** Features whose value differs from the counterfactual (diff highlight). */
    differingFeatures() {
        if (!this.counterfactual?.deltas)
            return [];
        return this.counterfactual.deltas.filter((d) => d.differs).map((d) => d.feature);
    }
    async loadPdp(feature) {
        if (!this.selected)
            throw new Error("no point selected");
        const resp = await this.api.pdp({ feature, point: this.selected.id });
        if (!this.store.accept(resp.version))
            return;
        const existing = this.pdpCurves.findIndex((c) => c.feature === feature);
        if (existing >= 0)
            this.pdpCurves[existing] = resp;
        else
            this.pdpCurves.push(resp);
    }
    async loadBins(controls) {
        const c = controls ?? defaultBinning(this.session);
        const resp = await this.api.bins(c);
        if (!this.store.accept(resp.version))
            return;
        this.binning = resp;
    }
}
