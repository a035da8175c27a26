"""Classification and regression performance measures.

The candidate-threshold rule lives here and is shared by the ROC curve,
single-threshold optimization and the fairness search: midpoints between
consecutive distinct scores plus the sentinels 0 and 1. No threshold
outside that set produces a different confusion matrix. A point is
predicted positive when its score >= threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import AnalysisError


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def fp_pct(self) -> float:
        denom = self.fp + self.tn
        return self.fp / denom if denom else 0.0

    @property
    def fn_pct(self) -> float:
        denom = self.fn + self.tp
        return self.fn / denom if denom else 0.0

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn
        )


@dataclass
class RocCurve:
    # ordered by ascending threshold: starts (1,1) at 0, ends (0,0) at 1
    fpr: list[float]
    tpr: list[float]
    thresholds: list[float]
    auc: float


def confusion_at(scores, labels, threshold: float) -> ConfusionMatrix:
    """Confusion counts with positives predicted at score >= threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape[0] == 0:
        return ConfusionMatrix(0, 0, 0, 0)
    pred = scores >= threshold
    actual = labels == 1
    tp = int(np.count_nonzero(pred & actual))
    fp = int(np.count_nonzero(pred & ~actual))
    fn = int(np.count_nonzero(~pred & actual))
    tn = int(np.count_nonzero(~pred & ~actual))
    return ConfusionMatrix(tp, fp, tn, fn)


def regression_metrics(preds, targets) -> dict[str, float]:
    preds = np.asarray(preds, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    if preds.shape[0] == 0 or preds.shape != targets.shape:
        raise AnalysisError("regression metrics need equal-length, non-empty inputs")
    err = preds - targets
    return {
        "mean_error": float(err.mean()),
        "mean_absolute_error": float(np.abs(err).mean()),
        "mean_squared_error": float((err * err).mean()),
    }


def candidate_thresholds(scores) -> np.ndarray:
    """Midpoints of consecutive distinct sorted scores plus sentinels 0, 1."""
    scores = np.asarray(scores, dtype=np.float64)
    distinct = np.unique(scores)
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    return np.unique(np.concatenate(([0.0], mids, [1.0])))


def sweep_confusions(scores, labels, thresholds) -> tuple[np.ndarray, ...]:
    """(tp, fp, tn, fn) arrays over an arbitrary threshold grid."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    order = np.argsort(scores, kind="stable")
    return _kernels.threshold_sweep(
        scores[order], labels[order], np.asarray(thresholds, dtype=np.float64)
    )


def _require_both_classes(labels: np.ndarray) -> None:
    if not (labels == 1).any():
        raise AnalysisError("no positive labels in input")
    if not (labels == 0).any():
        raise AnalysisError("no negative labels in input")


def roc_curve(scores, labels) -> RocCurve:
    """TPR/FPR at every candidate threshold; AUC by the trapezoid rule."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    _require_both_classes(labels)
    thresholds = candidate_thresholds(scores)
    tp, fp, tn, fn = sweep_confusions(scores, labels, thresholds)
    tpr = tp / (tp + fn)
    fpr = fp / (fp + tn)
    # ascending threshold means descending fpr; integrate tpr over fpr
    auc = float(np.sum((fpr[:-1] - fpr[1:]) * (tpr[:-1] + tpr[1:]) / 2.0))
    return RocCurve(
        fpr=[float(v) for v in fpr],
        tpr=[float(v) for v in tpr],
        thresholds=[float(t) for t in thresholds],
        auc=auc,
    )


def multiclass_confusion(pred_classes, true_classes, num_classes: int) -> list[list[int]]:
    """Counts[actual][predicted] for argmax classifications."""
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    for actual, predicted in zip(true_classes, pred_classes):
        counts[actual][predicted] += 1
    return [[int(v) for v in row] for row in counts]


def optimize_single_threshold(
    scores,
    labels,
    cost_ratio: float = 1.0,
    require_both_classes: bool = True,
) -> float:
    """Candidate threshold minimizing cost_ratio * FP + FN.

    At cost ratio 1 this maximizes accuracy. Ties break to the smallest
    candidate. ``require_both_classes`` is relaxed for per-slice use where
    single-class slices are legitimate.
    """
    if cost_ratio <= 0:
        raise AnalysisError("cost ratio must be positive")
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.shape[0] == 0:
        raise AnalysisError("cannot optimize a threshold on empty input")
    if require_both_classes:
        _require_both_classes(labels)
    thresholds = candidate_thresholds(scores)
    _, fp, _, fn = sweep_confusions(scores, labels, thresholds)
    cost = cost_ratio * fp + fn
    return float(thresholds[int(np.argmin(cost))])
