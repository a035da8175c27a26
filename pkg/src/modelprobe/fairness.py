"""Intersectional slicing, per-slice metrics and threshold strategies.

Five strategies assign positive-classification thresholds: a single
cost-optimal threshold, independent per-slice cost-optimal thresholds, and
three parity searches (demographic parity, equal opportunity, equal
accuracy). The parity searches scan a shared target over [0, 1] in steps of
0.001: each slice picks the candidate threshold whose matched quantity is
nearest the target (ties: lower slice cost, then lower threshold) and the
target minimizing the max pairwise disparity wins (ties: lower total cost).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from . import _kernels
from .binning import AxisBins, BinningSpec, assign_bins, bin_label
from .dataset import Dataset, Snapshot, Value, as_snapshot
from .errors import AnalysisError
from .metrics import (
    ConfusionMatrix,
    candidate_thresholds,
    confusion_at,
    multiclass_confusion,
    optimize_single_threshold,
    regression_metrics,
    sweep_confusions,
)
from .models import ModelHandle, ModelSession

TARGET_STEPS = 1000
DEFAULT_EPSILON = 0.01


class Strategy(Enum):
    SINGLE = "single"
    GROUP = "group"
    DEMOGRAPHIC_PARITY = "demographic-parity"
    EQUAL_OPPORTUNITY = "equal-opportunity"
    EQUAL_ACCURACY = "equal-accuracy"


@dataclass(frozen=True)
class GroundTruthBinding:
    feature: str
    positive_value: Value | None = None  # binary tasks
    class_order: tuple[str, ...] | None = None  # multiclass tasks


@dataclass(frozen=True)
class SliceSpec:
    features: tuple[str, ...]
    numeric_bin_count: int = 10

    def __post_init__(self):
        if not 1 <= len(self.features) <= 2:
            raise AnalysisError("slice by one feature or the intersection of two")


@dataclass
class Slice:
    key: str
    indices: np.ndarray  # positions into snapshot point order


@dataclass
class SliceMetrics:
    key: str
    count: int
    threshold: float
    confusion: ConfusionMatrix

    @property
    def accuracy(self) -> float:
        return self.confusion.accuracy


@dataclass
class ThresholdAssignment:
    strategy: Strategy
    thresholds: dict[str, float]
    cost_ratio: float
    epsilon: float | None = None
    achieved_disparity: float | None = None
    parity_met: bool | None = None
    quantities: dict[str, float] = field(default_factory=dict)

    @property
    def global_threshold(self) -> float | None:
        values = set(self.thresholds.values())
        return values.pop() if len(values) == 1 else None


# ---------------------------------------------------------------------------
# binding and slicing
# ---------------------------------------------------------------------------

def binary_labels(snap: Snapshot, binding: GroundTruthBinding) -> np.ndarray:
    """1 where the ground-truth feature equals the positive value, else 0."""
    idx = snap.feature_index(binding.feature)
    feat = snap.schema[idx]
    positive = binding.positive_value
    if positive is None:
        raise AnalysisError("binary binding needs a positive class value")
    if feat.kind.value == "numeric" and isinstance(positive, str):
        positive = float(positive)
    labels = np.empty(snap.n_points, dtype=np.int64)
    for i, p in enumerate(snap.points):
        v = p.values[idx]
        if v is None:
            raise AnalysisError(
                f"point {p.id} has no ground-truth label in {binding.feature!r}"
            )
        labels[i] = 1 if v == positive else 0
    return labels


def class_indices(snap: Snapshot, binding: GroundTruthBinding) -> np.ndarray:
    if not binding.class_order:
        raise AnalysisError("multiclass binding needs a class value order")
    lookup = {v: i for i, v in enumerate(binding.class_order)}
    idx = snap.feature_index(binding.feature)
    out = np.empty(snap.n_points, dtype=np.int64)
    for i, p in enumerate(snap.points):
        v = p.values[idx]
        if v not in lookup:
            raise AnalysisError(
                f"point {p.id}: label {v!r} not in the declared class order"
            )
        out[i] = lookup[v]
    return out


def regression_targets(snap: Snapshot, binding: GroundTruthBinding) -> np.ndarray:
    col = snap.numeric_column(binding.feature)
    if np.isnan(col).any():
        raise AnalysisError(f"missing ground-truth values in {binding.feature!r}")
    return col


def _axis_key(axis: AxisBins, i: int) -> str:
    return f"{axis.feature}={bin_label(axis, axis.bins[i])}"


def build_slices(data: Dataset | Snapshot, spec: SliceSpec) -> list[Slice]:
    """Partition points by one or two features; missing gets its own bin."""
    snap = as_snapshot(data)
    bins = assign_bins(
        snap,
        BinningSpec(
            x_feature=spec.features[0],
            y_feature=spec.features[1] if len(spec.features) > 1 else None,
            numeric_bin_count=spec.numeric_bin_count,
        ),
    )
    groups: dict[str, list[int]] = {}
    for i in range(snap.n_points):
        key = _axis_key(bins.x, i)
        if bins.y is not None:
            key = f"{key} & {_axis_key(bins.y, i)}"
        groups.setdefault(key, []).append(i)
    return [Slice(key, np.array(idx, dtype=np.int64)) for key, idx in groups.items()]


def _whole_dataset_slice(snap: Snapshot) -> list[Slice]:
    return [Slice("all", np.arange(snap.n_points, dtype=np.int64))]


def dataset_slices(data: Dataset | Snapshot, spec: SliceSpec | None) -> list[Slice]:
    """Slices for a spec, or the trivial whole-dataset slice when spec is None."""
    snap = as_snapshot(data)
    return build_slices(snap, spec) if spec else _whole_dataset_slice(snap)


# ---------------------------------------------------------------------------
# per-slice metrics
# ---------------------------------------------------------------------------

def _sort_slices(metrics: list[SliceMetrics], sort: str) -> list[SliceMetrics]:
    if sort == "count":
        return sorted(metrics, key=lambda m: (-m.count, m.key))
    if sort == "alpha":
        return sorted(metrics, key=lambda m: m.key)
    if sort == "accuracy":
        return sorted(metrics, key=lambda m: (-m.accuracy, m.key))
    raise AnalysisError(f"unknown slice sort: {sort!r}")


def slice_metrics(
    data: Dataset | Snapshot,
    session: ModelSession,
    model: ModelHandle,
    binding: GroundTruthBinding,
    slice_spec: SliceSpec | None,
    thresholds: dict[str, float] | float = 0.5,
    sort: str = "count",
) -> list[SliceMetrics]:
    """Binary confusion metrics per slice at that slice's threshold."""
    if model.task.kind != "binary":
        raise AnalysisError("slice confusion metrics need a binary model")
    snap = as_snapshot(data)
    labels = binary_labels(snap, binding)
    preds = session.predict_batch(model, snap.points, snap.feature_names)
    scores = np.array([p.value for p in preds])
    slices = dataset_slices(snap, slice_spec)
    out = []
    for sl in slices:
        t = thresholds if isinstance(thresholds, float) else thresholds.get(sl.key, 0.5)
        out.append(
            SliceMetrics(
                key=sl.key,
                count=int(sl.indices.shape[0]),
                threshold=t,
                confusion=confusion_at(scores[sl.indices], labels[sl.indices], t),
            )
        )
    return _sort_slices(out, sort)


def regression_slice_metrics(
    data: Dataset | Snapshot,
    session: ModelSession,
    model: ModelHandle,
    binding: GroundTruthBinding,
    slice_spec: SliceSpec | None,
    sort: str = "count",
) -> list[dict]:
    if model.task.kind != "regression":
        raise AnalysisError("regression metrics need a regression model")
    snap = as_snapshot(data)
    targets = regression_targets(snap, binding)
    preds = session.predict_batch(model, snap.points, snap.feature_names)
    values = np.array([p.value for p in preds])
    slices = dataset_slices(snap, slice_spec)
    rows = [
        {
            "slice_key": sl.key,
            "count": int(sl.indices.shape[0]),
            **regression_metrics(values[sl.indices], targets[sl.indices]),
        }
        for sl in slices
    ]
    if sort == "alpha":
        return sorted(rows, key=lambda r: r["slice_key"])
    return sorted(rows, key=lambda r: (-r["count"], r["slice_key"]))


def multiclass_slice_metrics(
    data: Dataset | Snapshot,
    session: ModelSession,
    model: ModelHandle,
    binding: GroundTruthBinding,
    slice_spec: SliceSpec | None,
    sort: str = "count",
) -> list[dict]:
    if model.task.kind != "multiclass":
        raise AnalysisError("multiclass metrics need a multiclass model")
    snap = as_snapshot(data)
    actual = class_indices(snap, binding)
    preds = session.predict_batch(model, snap.points, snap.feature_names)
    predicted = np.array([int(np.argmax(p.value)) for p in preds], dtype=np.int64)
    slices = dataset_slices(snap, slice_spec)
    rows = []
    for sl in slices:
        correct = int((predicted[sl.indices] == actual[sl.indices]).sum())
        rows.append(
            {
                "slice_key": sl.key,
                "count": int(sl.indices.shape[0]),
                "accuracy": correct / sl.indices.shape[0] if sl.indices.shape[0] else 0.0,
                "confusion": multiclass_confusion(
                    predicted[sl.indices], actual[sl.indices], model.task.num_classes
                ),
            }
        )
    if sort == "alpha":
        return sorted(rows, key=lambda r: r["slice_key"])
    return sorted(rows, key=lambda r: (-r["count"], r["slice_key"]))


# ---------------------------------------------------------------------------
# threshold strategies
# ---------------------------------------------------------------------------

def _matched_quantity(
    strategy: Strategy, tp: np.ndarray, fp: np.ndarray, tn: np.ndarray, fn: np.ndarray
) -> np.ndarray:
    n = tp + fp + tn + fn
    if strategy is Strategy.DEMOGRAPHIC_PARITY:
        return (tp + fp) / n
    if strategy is Strategy.EQUAL_OPPORTUNITY:
        pos = tp + fn
        return np.where(pos > 0, tp / np.where(pos > 0, pos, 1), 0.0)
    if strategy is Strategy.EQUAL_ACCURACY:
        return (tp + tn) / n
    raise AnalysisError(f"{strategy.value} has no matched quantity")


def optimize_thresholds(
    scores: np.ndarray,
    labels: np.ndarray,
    slices: list[Slice],
    strategy: Strategy,
    cost_ratio: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
) -> ThresholdAssignment:
    """Array-level core of the fairness optimization, one model at a time."""
    if cost_ratio <= 0:
        raise AnalysisError("cost ratio must be positive")
    if strategy is Strategy.SINGLE:
        t = optimize_single_threshold(scores, labels, cost_ratio)
        return ThresholdAssignment(
            strategy=strategy,
            thresholds={sl.key: t for sl in slices},
            cost_ratio=cost_ratio,
        )
    if len(slices) < 2:
        raise AnalysisError(f"{strategy.value} needs at least two slices")
    if strategy is Strategy.GROUP:
        thresholds = {
            sl.key: optimize_single_threshold(
                scores[sl.indices],
                labels[sl.indices],
                cost_ratio,
                require_both_classes=False,
            )
            for sl in slices
        }
        return ThresholdAssignment(
            strategy=strategy, thresholds=thresholds, cost_ratio=cost_ratio
        )

    qty_parts, cost_parts, thr_parts = [], [], []
    offsets = [0]
    for sl in slices:
        s = scores[sl.indices]
        y = labels[sl.indices]
        cands = candidate_thresholds(s)
        tp, fp, tn, fn = sweep_confusions(s, y, cands)
        qty_parts.append(_matched_quantity(strategy, tp, fp, tn, fn))
        cost_parts.append(cost_ratio * fp + fn)
        thr_parts.append(cands)
        offsets.append(offsets[-1] + cands.shape[0])
    taus = np.arange(TARGET_STEPS + 1) / TARGET_STEPS
    disparity, _, chosen = _kernels.target_scan(
        np.concatenate(qty_parts),
        np.concatenate(cost_parts).astype(np.float64),
        np.concatenate(thr_parts),
        np.array(offsets, dtype=np.int64),
        taus,
    )
    flat_thr = np.concatenate(thr_parts)
    flat_qty = np.concatenate(qty_parts)
    thresholds = {sl.key: float(flat_thr[chosen[i]]) for i, sl in enumerate(slices)}
    quantities = {sl.key: float(flat_qty[chosen[i]]) for i, sl in enumerate(slices)}
    return ThresholdAssignment(
        strategy=strategy,
        thresholds=thresholds,
        cost_ratio=cost_ratio,
        epsilon=epsilon,
        achieved_disparity=float(disparity),
        parity_met=bool(disparity <= epsilon),
        quantities=quantities,
    )


def optimize_fairness(
    data: Dataset | Snapshot,
    session: ModelSession,
    binding: GroundTruthBinding,
    slice_spec: SliceSpec | None,
    strategy: Strategy,
    cost_ratio: float = 1.0,
    epsilon: float = DEFAULT_EPSILON,
) -> dict[str, ThresholdAssignment]:
    """Optimize each registered model independently; binary tasks only."""
    snap = as_snapshot(data)
    task = session.task
    if task is None:
        raise AnalysisError("no model registered")
    if task.kind != "binary":
        raise AnalysisError("threshold strategies apply to binary classification only")
    labels = binary_labels(snap, binding)
    slices = dataset_slices(snap, slice_spec)
    out: dict[str, ThresholdAssignment] = {}
    for handle in session.handles():
        preds = session.predict_batch(handle, snap.points, snap.feature_names)
        scores = np.array([p.value for p in preds])
        out[handle.slot.value] = optimize_thresholds(
            scores, labels, slices, strategy, cost_ratio, epsilon
        )
    return out


def confusion_with_slice_thresholds(
    scores: np.ndarray,
    labels: np.ndarray,
    slices: list[Slice],
    thresholds: dict[str, float],
) -> ConfusionMatrix:
    """Whole-dataset confusion when every point uses its slice's threshold."""
    per_point = np.empty(scores.shape[0])
    for sl in slices:
        per_point[sl.indices] = thresholds[sl.key]
    pred = scores >= per_point
    actual = labels == 1
    return ConfusionMatrix(
        tp=int(np.count_nonzero(pred & actual)),
        fp=int(np.count_nonzero(pred & ~actual)),
        tn=int(np.count_nonzero(~pred & ~actual)),
        fn=int(np.count_nonzero(~pred & actual)),
    )
