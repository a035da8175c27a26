"""HTTP JSON service exposing one workspace per process.

Every endpoint is a thin adapter around :class:`~modelprobe.workspace.Workspace`
and serializes through the same canonical encoder as the CLI, so bodies are
byte-identical to library output. Errors map to {"code", "message"} with an
appropriate status. Mutations are serialized by the dataset's writer lock;
reads echo the snapshot version they were computed against.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from fastapi import Body, FastAPI, Request, Response
from fastapi.responses import StreamingResponse

from . import serialize
from .errors import (
    AnalysisError,
    IngestError,
    ModelProbeError,
    ModelSpecError,
    RemoteModelError,
    TypeMismatchError,
    UnknownDatasetError,
    UnknownFeatureError,
    UnknownPointError,
)
from .workspace import Settings, Workspace

_STATUS = {
    UnknownPointError: 404,
    UnknownFeatureError: 404,
    UnknownDatasetError: 404,
    TypeMismatchError: 400,
    IngestError: 400,
    ModelSpecError: 400,
    AnalysisError: 400,
    RemoteModelError: 502,
}

_CODES = {
    UnknownPointError: "unknown_point",
    UnknownFeatureError: "unknown_feature",
    UnknownDatasetError: "unknown_dataset",
    TypeMismatchError: "type_mismatch",
    IngestError: "ingest_error",
    ModelSpecError: "model_spec_error",
    AnalysisError: "analysis_error",
    RemoteModelError: "remote_model_error",
}


def json_response(payload, status_code: int = 200) -> Response:
    return Response(
        content=serialize.dump_bytes(payload),
        status_code=status_code,
        media_type="application/json",
    )


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    cors: bool = False
    ui_dir: str | None = None
    dataset_path: str | None = None
    dataset_format: str | None = None
    models: list[tuple[str, str]] = field(default_factory=list)  # (slot, spec path or url)
    settings: Settings = field(default_factory=Settings)


def _parse_range(raw: str | None) -> tuple[float, float] | None:
    if raw is None:
        return None
    lo, _, hi = raw.partition(":")
    try:
        return (float(lo), float(hi))
    except ValueError:
        raise AnalysisError(f"range must look like lo:hi, got {raw!r}") from None


def _split(raw: str | None) -> list[str] | None:
    if raw is None or raw == "":
        return None
    return [part for part in raw.split(",") if part]


def create_app(workspace: Workspace | None = None, cors: bool = False, ui_dir: str | None = None) -> FastAPI:
    ws = workspace or Workspace()
    app = FastAPI(title="modelprobe", docs_url=None, redoc_url=None)
    app.state.workspace = ws

    if cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["*"],
            allow_headers=["*"],
        )

    @app.exception_handler(ModelProbeError)
    async def handle_domain_error(_: Request, exc: ModelProbeError):
        status = _STATUS.get(type(exc), 400)
        code = _CODES.get(type(exc), "error")
        return json_response({"code": code, "message": str(exc)}, status_code=status)

    @app.exception_handler(ValueError)
    async def handle_value_error(_: Request, exc: ValueError):
        return json_response({"code": "invalid_input", "message": str(exc)}, status_code=400)

    # -- session ----------------------------------------------------------

    @app.get("/session")
    def session():
        return json_response(ws.session_payload())

    # -- datasets ---------------------------------------------------------

    @app.post("/datasets")
    async def upload_dataset(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("multipart/form-data"):
            form = await request.form()
            upload = form.get("file")
            if upload is None or isinstance(upload, str):
                raise IngestError("multipart upload needs a 'file' field")
            fmt = str(form.get("format") or _format_from_name(upload.filename))
            source = await upload.read()
        else:
            body = await request.json()
            fmt = body.get("format", "csv")
            source = body.get("content", "")
        _, payload = ws.load_dataset(source, fmt)
        return json_response(payload, status_code=201)

    @app.get("/datasets/{dataset_id}/stats")
    def dataset_stats(dataset_id: str, sort: str | None = None):
        return json_response(ws.stats(dataset_id, sort))

    @app.get("/datasets/{dataset_id}/points")
    def dataset_points(dataset_id: str, offset: int = 0, limit: int = 100):
        return json_response(ws.points(dataset_id, offset, limit))

    @app.patch("/datasets/{dataset_id}/points/{point_id}")
    def patch_point(dataset_id: str, point_id: int, body: dict = Body(...)):
        changes = body.get("changes", body)
        return json_response(ws.edit_point(point_id, changes, dataset_id))

    @app.post("/datasets/{dataset_id}/points/{point_id}/duplicate")
    def duplicate_point(dataset_id: str, point_id: int):
        return json_response(ws.duplicate_point(point_id, dataset_id), status_code=201)

    @app.delete("/datasets/{dataset_id}/points/{point_id}")
    def delete_point(dataset_id: str, point_id: int):
        return json_response(ws.delete_point(point_id, dataset_id))

    # -- models -----------------------------------------------------------

    @app.post("/models")
    def register_model(body: dict = Body(...)):
        slot = body.get("slot", "model1")
        spec_or_url = body.get("url") or body.get("spec")
        if spec_or_url is None:
            raise ModelSpecError("model registration needs a 'spec' document or a 'url'")
        payload = ws.register_model(
            slot, spec_or_url, task=body.get("task"), display_name=body.get("display_name")
        )
        return json_response(payload, status_code=201)

    @app.post("/predict")
    def predict(body: dict = Body(...)):
        return json_response(
            ws.predict(
                slot=body.get("model", "model1"),
                point_ids=body.get("point_ids"),
                inline_points=body.get("points"),
                use_cache=body.get("use_cache"),
            )
        )

    # -- analyses ----------------------------------------------------------

    @app.get("/analysis/bins")
    def analysis_bins(
        x: str | None = None,
        y: str | None = None,
        bins: int | None = None,
        color: str | None = None,
        label: str | None = None,
        positive: str | None = None,
        threshold: float = 0.5,
    ):
        return json_response(
            ws.bins(x=x, y=y, bins=bins, color=color, label=label, positive=positive, threshold=threshold)
        )

    @app.get("/analysis/counterfactual")
    def analysis_counterfactual(
        point: int,
        norm: str | None = None,
        model: str = "model1",
        threshold: float = 0.5,
        margin: float | None = None,
    ):
        return json_response(ws.counterfactual(point, norm, model, threshold, margin))

    @app.post("/analysis/distance-feature")
    def analysis_distance_feature(body: dict = Body(...)):
        if "point" not in body:
            raise AnalysisError("distance-feature needs a 'point' id")
        return json_response(
            ws.distance_feature(int(body["point"]), body.get("norm")), status_code=201
        )

    @app.get("/analysis/pdp")
    def analysis_pdp(
        request: Request,
        feature: str,
        point: int | None = None,
        range: str | None = None,
        num_points: int | None = None,
        stream: bool = False,
    ):
        is_global = request.query_params.get("global", "").lower() in ("1", "true")
        if stream and is_global:
            return _stream_global_pdp(ws, feature, _parse_range(range), num_points)
        payload = ws.pdp(
            feature,
            point_id=point,
            global_=is_global,
            range_=_parse_range(range),
            num_points=num_points,
        )
        return json_response(payload)

    @app.get("/analysis/performance")
    def analysis_performance(
        label: str,
        positive: str | None = None,
        classes: str | None = None,
        slice_by: str | None = None,
        cost_ratio: float | None = None,
        threshold: float | None = None,
        thresholds: str | None = None,
        sort: str = "count",
    ):
        per_slice = None
        if thresholds is not None:
            try:
                per_slice = {str(k): float(v) for k, v in json.loads(thresholds).items()}
            except (ValueError, AttributeError):
                raise AnalysisError("thresholds must be a JSON object of slice_key -> value")
        return json_response(
            ws.performance(
                label=label,
                positive=positive,
                classes=_split(classes),
                slice_by=_split(slice_by),
                cost_ratio=cost_ratio,
                threshold=threshold,
                thresholds=per_slice,
                sort=sort,
            )
        )

    @app.post("/analysis/fairness")
    def analysis_fairness(body: dict = Body(...)):
        if "strategy" not in body or "label" not in body:
            raise AnalysisError("fairness needs 'strategy' and 'label'")
        slice_by = body.get("slice_by")
        if isinstance(slice_by, str):
            slice_by = _split(slice_by)
        return json_response(
            ws.fairness(
                strategy=body["strategy"],
                label=body["label"],
                positive=body.get("positive"),
                slice_by=slice_by,
                cost_ratio=body.get("cost_ratio"),
                epsilon=body.get("epsilon", 0.01),
                sort=body.get("sort", "count"),
            )
        )

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def _format_from_name(filename: str | None) -> str:
    if filename and filename.endswith(".jsonl"):
        return "jsonl"
    return "csv"


def _stream_global_pdp(ws: Workspace, feature, range_, num_points):
    """Chunked progress per grid step, then the final curve payload.

    Each step's inference runs before its progress line is emitted; the
    final assembly re-reads the per-point scores from the prediction cache.
    """
    from .pdp import PdpSpec, _check_eligible, _mutated, _sweep_values, global_pdp

    snap = ws.snapshot()
    spec = PdpSpec(feature=feature, range=range_, num_points=num_points or 10)
    _check_eligible(snap, feature)
    _, xs = _sweep_values(snap, spec)
    idx = snap.feature_index(feature)

    def generate():
        total = len(xs)
        for i, x in enumerate(xs):
            step = [_mutated(p, idx, x) for p in snap.points]
            for handle in ws.models.handles():
                ws.models.predict_batch(handle, step, snap.feature_names)
            yield serialize.dump_bytes({"progress": i + 1, "total": total}) + b"\n"
        curve = global_pdp(snap, ws.models, spec)
        yield serialize.dump_bytes(serialize.pdp_payload(snap.version, curve)) + b"\n"

    return StreamingResponse(generate(), media_type="application/jsonl")


def build_workspace(config: ServiceConfig) -> Workspace:
    """Preload dataset and models per config; failures surface immediately."""
    ws = Workspace(settings=config.settings)
    if config.dataset_path:
        path = Path(config.dataset_path)
        fmt = config.dataset_format or ("jsonl" if path.suffix == ".jsonl" else "csv")
        ws.load_dataset(path.read_bytes(), fmt)
    for slot, source in config.models:
        if source.startswith(("http://", "https://")):
            ws.register_model(slot, source)
        else:
            ws.register_model(slot, json.loads(Path(source).read_text()))
    return ws


def serve(config: ServiceConfig) -> None:
    """Run the service until SIGINT/SIGTERM; preload failures raise first."""
    import uvicorn

    ws = build_workspace(config)
    app = create_app(ws, cors=config.cors, ui_dir=config.ui_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
