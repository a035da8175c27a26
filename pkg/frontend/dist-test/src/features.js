/**
 * Features tab: sortable summary statistics with histogram or CDF charts
 * per the service-reported display mode, chart/table and linear/log toggles.
 */
export class FeaturesViewModel {
    api;
    store;
    datasetId;
    sort = "non-uniformity";
    stats = {};
    order = [];
    showAsTable = false;
    logScale = false;
    lastError = null;
    constructor(api, store, datasetId) {
        this.api = api;
        this.store = store;
        this.datasetId = datasetId;
    }
    async refresh() {
        this.lastError = null;
        try {
            const resp = await this.api.stats(this.datasetId, this.sort);
            if (!this.store.accept(resp.version))
                return;
            this.stats = resp.features;
            this.order = resp.order ?? Object.keys(resp.features);
        }
        catch (e) {
            this.lastError = e instanceof Error ? e.message : String(e);
            throw e;
        }
    }
    async setSort(sort) {
        this.sort = sort;
        await this.refresh();
    }
    toggleTable() {
        this.showAsTable = !this.showAsTable;
    }
    toggleLogScale() {
        this.logScale = !this.logScale;
    }
    /** Bars for the chart: histogram counts or the running CDF, per display mode. */
    chartSeries(feature) {
        const s = this.stats[feature];
        if (!s)
            return [];
        if (s.kind === "categorical" && s.value_counts) {
            return Object.entries(s.value_counts).map(([label, value]) => ({ label, value }));
        }
        if (!s.histogram)
            return [];
        const { edges, counts } = s.histogram;
        if (s.display_mode === "histogram") {
            return counts.map((value, i) => ({
                label: edges.length > i + 1 ? `[${edges[i]}, ${edges[i + 1]})` : String(edges[i]),
                value,
            }));
        }
        const total = counts.reduce((a, b) => a + b, 0) || 1;
        let running = 0;
        return counts.map((c, i) => {
            running += c;
            return {
                label: edges.length > i + 1 ? String(edges[i + 1]) : String(edges[i]),
                value: running / total,
            };
        });
    }
}
