/**
 * Typed client for the analysis service. Every payload shape here mirrors
 * the service's canonical JSON exactly; the client adds no computation.
 */
export class ApiError extends Error {
    status;
    code;
    constructor(status, code, message) {
        super(message);
        this.status = status;
        this.code = code;
    }
}
export class ApiClient {
    baseUrl;
    fetchImpl;
    mutationChain = Promise.resolve();
    constructor(baseUrl = "", fetchImpl = (input, init) => fetch(input, init)) {
        this.baseUrl = baseUrl;
        this.fetchImpl = fetchImpl;
    }
    async request(path, init) {
        const resp = await this.fetchImpl(this.baseUrl + path, init);
        const text = await resp.text();
        let body = null;
        try {
            body = text ? JSON.parse(text) : null;
        }
        catch {
            throw new ApiError(resp.status, "bad_json", `unparseable response from ${path}`);
        }
        if (!resp.ok) {
            const err = body;
            throw new ApiError(resp.status, err?.code ?? "error", err?.message ?? resp.statusText);
        }
        return body;
    }
    get(path, params) {
        const query = params
            ? "?" +
                Object.entries(params)
                    .filter(([, v]) => v !== undefined)
                    .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`)
                    .join("&")
            : "";
        return this.request(path + query);
    }
    post(path, body, method = "POST") {
        return this.request(path, {
            method,
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
    }
    /** Mutations run one at a time; reads may overlap freely. */
    mutate(run) {
        const next = this.mutationChain.then(run, run);
        this.mutationChain = next.catch(() => undefined);
        return next;
    }
    session() {
        return this.get("/session");
    }
    points(datasetId, offset = 0, limit = 200) {
        return this.get(`/datasets/${datasetId}/points`, { offset, limit });
    }
    stats(datasetId, sort) {
        return this.get(`/datasets/${datasetId}/stats`, { sort });
    }
    editPoint(datasetId, pointId, changes) {
        return this.mutate(() => this.post(`/datasets/${datasetId}/points/${pointId}`, { changes }, "PATCH"));
    }
    duplicatePoint(datasetId, pointId) {
        return this.mutate(() => this.post(`/datasets/${datasetId}/points/${pointId}/duplicate`, {}));
    }
    deletePoint(datasetId, pointId) {
        return this.mutate(() => this.request(`/datasets/${datasetId}/points/${pointId}`, {
            method: "DELETE",
        }));
    }
    predictByIds(model, pointIds) {
        return this.post("/predict", { model, point_ids: pointIds });
    }
    predictInline(model, points) {
        return this.post("/predict", { model, points });
    }
    bins(params) {
        return this.get("/analysis/bins", params);
    }
    counterfactual(point, norm, model) {
        return this.get("/analysis/counterfactual", { point, norm, model });
    }
    pdp(params) {
        return this.get("/analysis/pdp", params);
    }
    performance(params) {
        return this.get("/analysis/performance", params);
    }
    fairness(body) {
        return this.post("/analysis/fairness", body);
    }
}
