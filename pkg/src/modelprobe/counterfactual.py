"""Datapoint distances and nearest-counterfactual search.

Numeric feature distance is the absolute difference scaled by the feature's
population standard deviation over the whole dataset; categorical distance
is 0 on equal values and otherwise the feature's collision probability (the
chance two random points share a value). Per-feature distances aggregate
under an L1 or L2 norm. The nearest counterfactual of a point is the
minimum-distance point whose model outcome differs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .dataset import Dataset, FeatureKind, Snapshot, Value, as_snapshot
from .errors import UnknownFeatureError
from .models import ModelHandle, ModelSession, Prediction


class DistanceNorm(Enum):
    L1 = "l1"
    L2 = "l2"


@dataclass(frozen=True)
class FeatureDistanceStats:
    """Per-feature normalizers: std for numeric, collision probability otherwise."""

    std: dict[str, float]
    collision_probability: dict[str, float]


@dataclass
class FeatureDelta:
    feature: str
    anchor_value: Value
    match_value: Value
    distance: float


@dataclass
class CounterfactualResult:
    anchor_id: int
    found: bool
    match_id: int | None = None
    distance: float | None = None
    deltas: list[FeatureDelta] | None = None


def compute_distance_stats(data: Dataset | Snapshot) -> FeatureDistanceStats:
    snap = as_snapshot(data)
    std: dict[str, float] = {}
    collision: dict[str, float] = {}
    for feat in snap.schema:
        if feat.kind is FeatureKind.NUMERIC:
            col = snap.numeric_column(feat.name)
            present = col[~np.isnan(col)]
            std[feat.name] = float(present.std()) if present.shape[0] else 0.0
        else:
            codes, _ = snap.categorical_codes(feat.name)
            present = codes[codes >= 0]
            if present.shape[0] == 0:
                collision[feat.name] = 1.0
            else:
                counts = np.bincount(present)
                p = counts / present.shape[0]
                collision[feat.name] = float((p * p).sum())
    return FeatureDistanceStats(std=std, collision_probability=collision)


def feature_distance(
    kind: FeatureKind, a: Value, b: Value, normalizer: float
) -> float:
    """Distance along one feature; ``normalizer`` is std or collision probability."""
    if a is None and b is None:
        return 0.0
    if kind is FeatureKind.NUMERIC:
        if a is None or b is None:
            return 1.0
        return abs(a - b) / normalizer if normalizer > 0 else 0.0
    if a is None or b is None:
        return normalizer
    return 0.0 if a == b else normalizer


def _mask_features(snap: Snapshot, feature_mask: list[str] | None) -> list[str]:
    if feature_mask is None:
        return snap.feature_names
    for name in feature_mask:
        if not snap.has_feature(name):
            raise UnknownFeatureError(f"unknown feature: {name!r}")
    return list(feature_mask)


def datapoint_distance(
    data: Dataset | Snapshot,
    a_id: int,
    b_id: int,
    norm: DistanceNorm = DistanceNorm.L1,
    stats: FeatureDistanceStats | None = None,
    feature_mask: list[str] | None = None,
) -> float:
    """Aggregate distance between two points over non-derived features."""
    snap = as_snapshot(data)
    stats = stats or compute_distance_stats(snap)
    a = snap.point(a_id)
    b = snap.point(b_id)
    total = 0.0
    for name in _mask_features(snap, feature_mask):
        feat = snap.schema_for(name)
        idx = snap.feature_index(name)
        normalizer = (
            stats.std[name]
            if feat.kind is FeatureKind.NUMERIC
            else stats.collision_probability[name]
        )
        d = feature_distance(feat.kind, a.values[idx], b.values[idx], normalizer)
        total += d * d if norm is DistanceNorm.L2 else d
    return float(np.sqrt(total)) if norm is DistanceNorm.L2 else total


def distances_to_anchor(
    snap: Snapshot,
    anchor_id: int,
    norm: DistanceNorm,
    stats: FeatureDistanceStats | None = None,
    feature_mask: list[str] | None = None,
) -> np.ndarray:
    """Distance from the anchor to every point, in point order."""
    stats = stats or compute_distance_stats(snap)
    names = _mask_features(snap, feature_mask)
    anchor = snap.point(anchor_id)
    anchor_idx = snap.point_index(anchor_id)

    num_names = [n for n in names if snap.schema_for(n).kind is FeatureKind.NUMERIC]
    cat_names = [n for n in names if snap.schema_for(n).kind is FeatureKind.CATEGORICAL]

    n = snap.n_points
    num = np.empty((n, len(num_names)))
    num_anchor = np.empty(len(num_names))
    for j, name in enumerate(num_names):
        num[:, j] = snap.numeric_column(name)
        v = anchor.values[snap.feature_index(name)]
        num_anchor[j] = np.nan if v is None else v
    num_std = np.array([stats.std[name] for name in num_names])
    cat = np.empty((n, len(cat_names)), dtype=np.int64)
    cat_anchor = np.empty(len(cat_names), dtype=np.int64)
    for j, name in enumerate(cat_names):
        codes, _ = snap.categorical_codes(name)
        cat[:, j] = codes
        cat_anchor[j] = codes[anchor_idx]
    cat_coll = np.array([stats.collision_probability[name] for name in cat_names])

    return _kernels.anchor_distances(
        num, num_anchor, num_std, cat, cat_anchor, cat_coll, norm is DistanceNorm.L2
    )


def _outcome_differs(
    task_kind: str,
    anchor: Prediction,
    other: Prediction,
    threshold: float,
    margin: float,
) -> bool:
    if task_kind == "binary":
        return (anchor.value >= threshold) != (other.value >= threshold)
    if task_kind == "multiclass":
        return int(np.argmax(anchor.value)) != int(np.argmax(other.value))
    return abs(anchor.value - other.value) > margin


def nearest_counterfactual(
    data: Dataset | Snapshot,
    session: ModelSession,
    model: ModelHandle,
    anchor_id: int,
    norm: DistanceNorm = DistanceNorm.L1,
    threshold: float = 0.5,
    margin: float | None = None,
    stats: FeatureDistanceStats | None = None,
) -> CounterfactualResult:
    """Closest point whose predicted outcome differs from the anchor's.

    Binary outcomes compare thresholded classes, multiclass compares argmax
    classes, and regression outcomes differ when predictions are more than
    ``margin`` apart (default: one std of the predictions). Ties break to
    the lowest point id; derived features never contribute to distance.
    """
    snap = as_snapshot(data)
    anchor = snap.point(anchor_id)
    preds = session.predict_batch(model, snap.points, snap.feature_names)
    anchor_pred = preds[snap.point_index(anchor_id)]

    if model.task.kind == "regression" and margin is None:
        values = np.array([p.value for p in preds])
        margin = float(values.std())

    dists = distances_to_anchor(snap, anchor_id, norm, stats=stats)
    best_idx = -1
    best = (np.inf, np.inf)  # (distance, point id)
    for i, p in enumerate(snap.points):
        if p.id == anchor_id:
            continue
        if not _outcome_differs(
            model.task.kind, anchor_pred, preds[i], threshold, margin or 0.0
        ):
            continue
        key = (dists[i], p.id)
        if key < best:
            best = key
            best_idx = i
    if best_idx < 0:
        return CounterfactualResult(anchor_id=anchor_id, found=False)

    match = snap.points[best_idx]
    stats = stats or compute_distance_stats(snap)
    deltas = []
    for idx, feat in enumerate(snap.schema):
        normalizer = (
            stats.std[feat.name]
            if feat.kind is FeatureKind.NUMERIC
            else stats.collision_probability[feat.name]
        )
        deltas.append(
            FeatureDelta(
                feature=feat.name,
                anchor_value=anchor.values[idx],
                match_value=match.values[idx],
                distance=feature_distance(
                    feat.kind, anchor.values[idx], match.values[idx], normalizer
                ),
            )
        )
    return CounterfactualResult(
        anchor_id=anchor_id,
        found=True,
        match_id=match.id,
        distance=float(dists[best_idx]),
        deltas=deltas,
    )


def attach_distance_feature(
    dataset: Dataset,
    anchor_id: int,
    norm: DistanceNorm = DistanceNorm.L1,
) -> str:
    """Persist distance-to-anchor as a derived feature; returns its name."""
    snap = dataset.snapshot()
    snap.point(anchor_id)
    dists = distances_to_anchor(snap, anchor_id, norm)
    values = {p.id: float(d) for p, d in zip(snap.points, dists)}
    return dataset.add_derived_feature(f"distance_{norm.value}_to_{anchor_id}", values)
