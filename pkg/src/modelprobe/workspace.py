"""Session facade shared by the HTTP service and the CLI.

A workspace binds one dataset (replaceable), up to two models, score
history and analysis settings. Every public method returns the exact
payload dict that both surfaces serialize, so a CLI report and the
corresponding endpoint body are the same bytes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from . import serialize
from .binning import BinningSpec, ModelField, assign_bins
from .counterfactual import DistanceNorm, attach_distance_feature, nearest_counterfactual
from .dataset import DataPoint, Dataset, FeatureKind, Snapshot, coerce_value, ingest
from .errors import AnalysisError, ModelSpecError, UnknownDatasetError
from .fairness import (
    GroundTruthBinding,
    SliceSpec,
    Strategy,
    binary_labels,
    dataset_slices,
    multiclass_slice_metrics,
    optimize_thresholds,
    regression_slice_metrics,
    slice_metrics,
)
from .metrics import optimize_single_threshold, roc_curve
from .models import ModelSession, ScoreTracker, Slot, TaskKind
from .pdp import PdpSpec, global_pdp, local_pdp
from .stats import SortKey, compute_feature_statistics, sort_features

DEFAULT_POINT_LIMIT = 100

_MODEL_FIELD_SUFFIXES = ("score", "class", "correct", "error")


@dataclass
class Settings:
    cost_ratio: float = 1.0
    norm: DistanceNorm = DistanceNorm.L1
    bin_count: int = 10

    def to_json(self) -> dict:
        return {
            "cost_ratio": self.cost_ratio,
            "norm": self.norm.value,
            "bin_count": self.bin_count,
        }


class Workspace:
    def __init__(self, settings: Settings | None = None):
        self.settings = settings or Settings()
        fanout = int(os.environ.get("MODELPROBE_FANOUT", "8"))
        self.models = ModelSession(fanout=fanout)
        self.tracker = ScoreTracker()
        self._datasets: dict[str, Dataset] = {}
        self._current: str | None = None
        self._counter = 0

    # -- dataset management ---------------------------------------------

    def load_dataset(self, source: bytes | str, format: str) -> tuple[str, dict]:
        ds = ingest(source, format)
        self._counter += 1
        dataset_id = f"d{self._counter - 1}"
        self._datasets[dataset_id] = ds
        self._current = dataset_id
        snap = ds.snapshot()
        return dataset_id, {
            "id": dataset_id,
            "version": snap.version,
            "n_points": snap.n_points,
            "schema": [{"name": f.name, "kind": f.kind.value} for f in snap.schema],
        }

    def dataset(self, dataset_id: str | None = None) -> Dataset:
        key = dataset_id or self._current
        if key is None:
            raise AnalysisError("no dataset loaded")
        if key not in self._datasets:
            raise UnknownDatasetError(f"unknown dataset: {key}")
        return self._datasets[key]

    def snapshot(self, dataset_id: str | None = None) -> Snapshot:
        return self.dataset(dataset_id).snapshot()

    def session_payload(self) -> dict:
        dataset = None
        if self._current is not None:
            snap = self.snapshot()
            dataset = {
                "id": self._current,
                "version": snap.version,
                "n_points": snap.n_points,
                "schema": [{"name": f.name, "kind": f.kind.value} for f in snap.schema],
                "derived": snap.derived_names(),
            }
        return {
            "dataset": dataset,
            "models": [
                {
                    "slot": h.slot.value,
                    "task": h.task.to_json(),
                    "remote": h.is_remote,
                    "display_name": h.display_name,
                }
                for h in self.models.handles()
            ],
            "comparison_mode": self.models.comparison_mode,
            "settings": self.settings.to_json(),
        }

    # -- dataset reads and edits ------------------------------------------

    def stats(self, dataset_id: str | None = None, sort: str | None = None) -> dict:
        snap = self.snapshot(dataset_id)
        stats = compute_feature_statistics(snap)
        order = None
        if sort is not None:
            order = sort_features(stats, SortKey(sort))
        return serialize.stats_payload(snap.version, stats, order)

    def points(
        self, dataset_id: str | None = None, offset: int = 0, limit: int = DEFAULT_POINT_LIMIT
    ) -> dict:
        return serialize.points_payload(self.snapshot(dataset_id), offset, limit)

    def edit_point(self, point_id: int, changes: dict, dataset_id: str | None = None) -> dict:
        ds = self.dataset(dataset_id)
        ds.edit_point(point_id, changes)
        snap = ds.snapshot()
        return {"version": snap.version, "point": serialize.point_payload(snap, point_id)}

    def duplicate_point(self, point_id: int, dataset_id: str | None = None) -> dict:
        ds = self.dataset(dataset_id)
        copy = ds.duplicate_point(point_id)
        snap = ds.snapshot()
        return {"version": snap.version, "point": serialize.point_payload(snap, copy.id)}

    def delete_point(self, point_id: int, dataset_id: str | None = None) -> dict:
        ds = self.dataset(dataset_id)
        ds.delete_point(point_id)
        return {"version": ds.version}

    # -- models and prediction --------------------------------------------

    def register_model(
        self,
        slot: str,
        spec_or_url,
        task: dict | None = None,
        display_name: str | None = None,
    ) -> dict:
        handle = self.models.register(
            spec_or_url,
            Slot(slot),
            task=TaskKind.from_json(task) if task else None,
            display_name=display_name,
        )
        return {
            "slot": handle.slot.value,
            "task": handle.task.to_json(),
            "remote": handle.is_remote,
            "display_name": handle.display_name,
            "comparison_mode": self.models.comparison_mode,
        }

    def _inline_point(self, snap: Snapshot, raw: dict) -> DataPoint:
        values = []
        for feat in snap.schema:
            values.append(coerce_value(feat.name, feat.kind, raw.get(feat.name)))
        return DataPoint(-1, tuple(values))

    def predict(
        self,
        slot: str,
        point_ids: list[int] | None = None,
        inline_points: list[dict] | None = None,
        dataset_id: str | None = None,
        use_cache: bool | None = None,
    ) -> dict:
        handle = self.models.get(Slot(slot))
        snap = self.snapshot(dataset_id)
        rows = []
        if point_ids is not None:
            points = [snap.point(pid) for pid in point_ids]
            preds = self.models.predict_batch(handle, points, snap.feature_names, use_cache)
            for pid, pred in zip(point_ids, preds):
                delta = self.tracker.record(handle.slot, pid, pred)
                rows.append({"id": pid, **serialize.prediction_payload(pred, delta)})
        elif inline_points is not None:
            points = [self._inline_point(snap, raw) for raw in inline_points]
            preds = self.models.predict_batch(handle, points, snap.feature_names, use_cache)
            rows = [{"id": None, **serialize.prediction_payload(p, None)} for p in preds]
        else:
            raise AnalysisError("predict needs point_ids or points")
        return {"version": snap.version, "model": handle.slot.value, "predictions": rows}

    # -- analyses ----------------------------------------------------------

    def _model_fields(
        self,
        snap: Snapshot,
        names: list[str],
        label: str | None,
        positive: str | None,
        threshold: float,
    ) -> dict[str, ModelField]:
        """Resolve {slot}_{score|class|correct|error} axis names."""
        fields: dict[str, ModelField] = {}
        for axis in names:
            if axis is None or "_" not in axis:
                continue
            slot_name, _, suffix = axis.partition("_")
            if suffix not in _MODEL_FIELD_SUFFIXES:
                continue
            try:
                handle = self.models.get(Slot(slot_name))
            except (ValueError, ModelSpecError):
                continue
            preds = self.models.predict_batch(handle, snap.points, snap.feature_names)
            if suffix == "score":
                fields[axis] = ModelField(
                    [p.scalar() for p in preds], FeatureKind.NUMERIC
                )
            elif suffix == "class":
                if handle.task.kind == "binary":
                    values = ["1" if p.value >= threshold else "0" for p in preds]
                elif handle.task.kind == "multiclass":
                    values = [str(int(np.argmax(p.value))) for p in preds]
                else:
                    raise AnalysisError("regression models have no predicted class")
                fields[axis] = ModelField(values, FeatureKind.CATEGORICAL)
            elif suffix == "correct":
                if handle.task.kind != "binary":
                    raise AnalysisError("correctness coloring needs a binary model")
                if label is None or positive is None:
                    raise AnalysisError("correctness coloring needs label and positive")
                labels = binary_labels(snap, GroundTruthBinding(label, positive))
                values = [
                    "correct" if (p.value >= threshold) == bool(l) else "wrong"
                    for p, l in zip(preds, labels)
                ]
                fields[axis] = ModelField(values, FeatureKind.CATEGORICAL)
            elif suffix == "error":
                if handle.task.kind != "regression":
                    raise AnalysisError("error coloring needs a regression model")
                if label is None:
                    raise AnalysisError("error coloring needs a label feature")
                targets = snap.numeric_column(label)
                values = [float(p.value) - t for p, t in zip(preds, targets)]
                fields[axis] = ModelField(values, FeatureKind.NUMERIC)
        return fields

    def bins(
        self,
        x: str | None = None,
        y: str | None = None,
        bins: int | None = None,
        color: str | None = None,
        label: str | None = None,
        positive: str | None = None,
        threshold: float = 0.5,
        dataset_id: str | None = None,
    ) -> dict:
        snap = self.snapshot(dataset_id)
        spec = BinningSpec(
            x_feature=x,
            y_feature=y,
            numeric_bin_count=bins or self.settings.bin_count,
            color_feature=color,
        )
        fields = self._model_fields(snap, [x, y, color], label, positive, threshold)
        assignment = assign_bins(snap, spec, fields or None)
        return serialize.bins_payload(assignment, snap)

    def counterfactual(
        self,
        point_id: int,
        norm: str | None = None,
        slot: str = "model1",
        threshold: float = 0.5,
        margin: float | None = None,
        dataset_id: str | None = None,
    ) -> dict:
        snap = self.snapshot(dataset_id)
        handle = self.models.get(Slot(slot))
        d_norm = DistanceNorm(norm) if norm else self.settings.norm
        result = nearest_counterfactual(
            snap, self.models, handle, point_id, d_norm, threshold, margin
        )
        return serialize.counterfactual_payload(snap.version, result, d_norm, handle.slot.value)

    def distance_feature(
        self, point_id: int, norm: str | None = None, dataset_id: str | None = None
    ) -> dict:
        ds = self.dataset(dataset_id)
        d_norm = DistanceNorm(norm) if norm else self.settings.norm
        name = attach_distance_feature(ds, point_id, d_norm)
        return {"version": ds.version, "feature": name}

    def pdp(
        self,
        feature: str,
        point_id: int | None = None,
        global_: bool = False,
        range_: tuple[float, float] | None = None,
        num_points: int | None = None,
        dataset_id: str | None = None,
    ) -> dict:
        snap = self.snapshot(dataset_id)
        if not self.models.handles():
            raise AnalysisError("no model registered")
        spec = PdpSpec(
            feature=feature,
            range=range_,
            num_points=num_points or 10,
        )
        if global_:
            curve = global_pdp(snap, self.models, spec)
        else:
            if point_id is None:
                raise AnalysisError("pdp needs a point id or global=true")
            curve = local_pdp(snap, self.models, point_id, spec)
        return serialize.pdp_payload(snap.version, curve)

    def _binding(self, label: str | None, positive: str | None, classes: list[str] | None):
        if label is None:
            raise AnalysisError("a ground-truth label feature is required")
        return GroundTruthBinding(
            feature=label,
            positive_value=positive,
            class_order=tuple(classes) if classes else None,
        )

    def performance(
        self,
        label: str,
        positive: str | None = None,
        classes: list[str] | None = None,
        slice_by: list[str] | None = None,
        cost_ratio: float | None = None,
        threshold: float | None = None,
        thresholds: dict[str, float] | None = None,
        sort: str = "count",
        dataset_id: str | None = None,
    ) -> dict:
        snap = self.snapshot(dataset_id)
        task = self.models.task
        if task is None:
            raise AnalysisError("no model registered")
        binding = self._binding(label, positive, classes)
        spec = SliceSpec(tuple(slice_by), self.settings.bin_count) if slice_by else None
        ratio = cost_ratio if cost_ratio is not None else self.settings.cost_ratio
        rows = []
        for handle in self.models.handles():
            if task.kind == "binary":
                labels = binary_labels(snap, binding)
                preds = self.models.predict_batch(handle, snap.points, snap.feature_names)
                scores = np.array([p.value for p in preds])
                if thresholds is not None:
                    per_slice: dict[str, float] | float = {
                        k: float(v) for k, v in thresholds.items()
                    }
                    headline = None
                else:
                    headline = (
                        threshold
                        if threshold is not None
                        else optimize_single_threshold(scores, labels, ratio)
                    )
                    per_slice = headline
                slices = slice_metrics(
                    snap, self.models, handle, binding, spec, per_slice, sort=sort
                )
                rows.append(
                    {
                        "model": handle.slot.value,
                        "threshold": headline,
                        "slices": [serialize.slice_payload(m) for m in slices],
                        "roc": serialize.roc_payload(roc_curve(scores, labels)),
                    }
                )
            elif task.kind == "regression":
                rows.append(
                    {
                        "model": handle.slot.value,
                        "slices": regression_slice_metrics(
                            snap, self.models, handle, binding, spec, sort=sort
                        ),
                    }
                )
            else:
                rows.append(
                    {
                        "model": handle.slot.value,
                        "slices": multiclass_slice_metrics(
                            snap, self.models, handle, binding, spec, sort=sort
                        ),
                    }
                )
        ratio_out = ratio if task.kind == "binary" else None
        return serialize.performance_payload(snap.version, task.kind, ratio_out, rows)

    def fairness(
        self,
        strategy: str,
        label: str,
        positive: str | None = None,
        slice_by: list[str] | None = None,
        cost_ratio: float | None = None,
        epsilon: float = 0.01,
        sort: str = "count",
        dataset_id: str | None = None,
    ) -> dict:
        snap = self.snapshot(dataset_id)
        task = self.models.task
        if task is None:
            raise AnalysisError("no model registered")
        if task.kind != "binary":
            raise AnalysisError("threshold strategies apply to binary classification only")
        strat = Strategy(strategy)
        binding = self._binding(label, positive, None)
        spec = SliceSpec(tuple(slice_by), self.settings.bin_count) if slice_by else None
        ratio = cost_ratio if cost_ratio is not None else self.settings.cost_ratio
        labels = binary_labels(snap, binding)
        slices = dataset_slices(snap, spec)
        rows = []
        for handle in self.models.handles():
            preds = self.models.predict_batch(handle, snap.points, snap.feature_names)
            scores = np.array([p.value for p in preds])
            assignment = optimize_thresholds(scores, labels, slices, strat, ratio, epsilon)
            per_slice = slice_metrics(
                snap, self.models, handle, binding, spec, assignment.thresholds, sort=sort
            )
            rows.append(serialize.assignment_row(handle, assignment, per_slice))
        return serialize.fairness_payload(snap.version, strat, ratio, epsilon, rows)
