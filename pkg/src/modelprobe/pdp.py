"""Local and global partial dependence: score response to one feature.

A local curve re-infers copies of one point with the feature swept over a
grid (numeric: equally spaced over the dataset-wide observed range or an
override, endpoints inclusive; categorical: the most common values). The
global curve is the arithmetic mean of that sweep over every point, which
equals the pointwise mean of all local curves on the same grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dataset import DataPoint, Dataset, FeatureKind, Snapshot, Value, as_snapshot
from .errors import AnalysisError, UnknownFeatureError
from .models import ModelHandle, ModelSession
from .stats import compute_feature_statistics

DEFAULT_NUM_POINTS = 10
DEFAULT_CATEGORY_LIMIT = 10
DEFAULT_TOP_CLASSES = 3
FLAT_SPREAD = 1e-12


@dataclass(frozen=True)
class PdpSpec:
    feature: str
    range: tuple[float, float] | None = None
    num_points: int = DEFAULT_NUM_POINTS
    categorical_values: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.num_points < 2:
            raise AnalysisError("pdp needs at least 2 sweep points")
        if self.range is not None and not self.range[0] < self.range[1]:
            raise AnalysisError("pdp range must satisfy lo < hi")


@dataclass
class PdpSeries:
    model: str
    class_label: str | None
    ys: list[float]


@dataclass
class PdpCurve:
    feature: str
    kind: FeatureKind
    xs: list[Value]
    series: list[PdpSeries]
    original_value: Value | None = None
    thresholds: dict[str, float] = field(default_factory=dict)


def eligible_features(data: Dataset | Snapshot) -> list[str]:
    """Schema features that are not ID-like (all-distinct); derived excluded.

    A single-point dataset keeps all features: "one value per point" only
    signals an ID column when there is more than one point.
    """
    snap = as_snapshot(data)
    stats = compute_feature_statistics(snap)
    return [
        s.name
        for s in stats
        if not (snap.n_points > 1 and s.distinct_count == snap.n_points)
    ]


def _sweep_values(snap: Snapshot, spec: PdpSpec) -> tuple[FeatureKind, list[Value]]:
    feat = snap.schema_for(spec.feature)
    if feat.kind is FeatureKind.NUMERIC:
        if spec.range is not None:
            lo, hi = spec.range
        else:
            col = snap.numeric_column(spec.feature)
            present = col[~np.isnan(col)]
            if present.shape[0] == 0:
                raise AnalysisError(f"feature {spec.feature!r} has no observed values")
            lo, hi = float(present.min()), float(present.max())
        if hi > lo:
            xs = [float(v) for v in np.linspace(lo, hi, spec.num_points)]
        else:
            xs = [lo]
        return feat.kind, xs
    if spec.categorical_values is not None:
        return feat.kind, list(spec.categorical_values)
    codes, values = snap.categorical_codes(spec.feature)
    counts = np.bincount(codes[codes >= 0], minlength=len(values))
    # most common first, ties by value; chart width capped
    order = sorted(range(len(values)), key=lambda i: (-counts[i], values[i]))
    return feat.kind, [values[i] for i in order[:DEFAULT_CATEGORY_LIMIT]]


def _check_eligible(snap: Snapshot, feature: str) -> None:
    if feature in snap.derived_names():
        raise AnalysisError(f"derived feature {feature!r} is not eligible for pdp")
    if feature not in eligible_features(snap):
        if not snap.has_feature(feature):
            raise UnknownFeatureError(f"unknown feature: {feature!r}")
        raise AnalysisError(
            f"feature {feature!r} has a unique value per point; pdp would not be meaningful"
        )


def _mutated(point: DataPoint, idx: int, value: Value) -> DataPoint:
    values = list(point.values)
    values[idx] = value
    return DataPoint(point.id, tuple(values), point.origin)


def _top_classes(handle: ModelHandle, score_vector) -> list[int]:
    # stable argsort descending: ties keep the lower class index first
    order = np.argsort(-np.asarray(score_vector), kind="stable")
    return [int(c) for c in order[:DEFAULT_TOP_CLASSES]]


def _series_for(
    session: ModelSession,
    handle: ModelHandle,
    base_points: list[DataPoint],
    feature_idx: int,
    xs: list[Value],
    feature_names: list[str],
    classes: list[int] | None,
    aggregate: bool,
) -> list[PdpSeries]:
    columns: list[list[float]] = []
    for x in xs:
        step_points = [_mutated(p, feature_idx, x) for p in base_points]
        preds = session.predict_batch(handle, step_points, feature_names)
        if classes is None:
            vals = [p.value for p in preds]
            columns.append([float(np.mean(vals)) if aggregate else float(vals[0])])
        else:
            columns.append(
                [
                    float(np.mean([p.value[c] for p in preds]))
                    if aggregate
                    else float(preds[0].value[c])
                    for c in classes
                ]
            )
    if classes is None:
        return [PdpSeries(handle.slot.value, None, [col[0] for col in columns])]
    return [
        PdpSeries(handle.slot.value, str(c), [col[j] for col in columns])
        for j, c in enumerate(classes)
    ]


def _classes_for(
    session: ModelSession,
    handle: ModelHandle,
    snap: Snapshot,
    point: DataPoint | None,
) -> list[int] | None:
    """Class indices to chart for multiclass; None for scalar tasks."""
    if handle.task.kind != "multiclass":
        return None
    if point is not None:
        base = session.predict_batch(handle, [point], snap.feature_names)[0]
        return _top_classes(handle, base.value)
    preds = session.predict_batch(handle, snap.points, snap.feature_names)
    mean_scores = np.mean([p.value for p in preds], axis=0)
    return _top_classes(handle, mean_scores)


def local_pdp(
    data: Dataset | Snapshot,
    session: ModelSession,
    point_id: int,
    spec: PdpSpec,
    thresholds: dict[str, float] | None = None,
) -> PdpCurve:
    """Score response of one point as the feature sweeps; the point is never mutated."""
    snap = as_snapshot(data)
    _check_eligible(snap, spec.feature)
    point = snap.point(point_id)
    kind, xs = _sweep_values(snap, spec)
    idx = snap.feature_index(spec.feature)
    series = []
    for handle in session.handles():
        classes = _classes_for(session, handle, snap, point)
        series.extend(
            _series_for(
                session, handle, [point], idx, xs, snap.feature_names, classes, aggregate=False
            )
        )
    return PdpCurve(
        feature=spec.feature,
        kind=kind,
        xs=xs,
        series=series,
        original_value=point.values[idx],
        thresholds=_threshold_markers(session, thresholds),
    )


def global_pdp(
    data: Dataset | Snapshot,
    session: ModelSession,
    spec: PdpSpec,
    thresholds: dict[str, float] | None = None,
) -> PdpCurve:
    """Mean score over all points at each swept value of the feature."""
    snap = as_snapshot(data)
    _check_eligible(snap, spec.feature)
    if snap.n_points == 0:
        raise AnalysisError("global pdp needs a non-empty dataset")
    kind, xs = _sweep_values(snap, spec)
    idx = snap.feature_index(spec.feature)
    series = []
    for handle in session.handles():
        classes = _classes_for(session, handle, snap, None)
        series.extend(
            _series_for(
                session,
                handle,
                list(snap.points),
                idx,
                xs,
                snap.feature_names,
                classes,
                aggregate=True,
            )
        )
    return PdpCurve(
        feature=spec.feature,
        kind=kind,
        xs=xs,
        series=series,
        original_value=None,
        thresholds=_threshold_markers(session, thresholds),
    )


def _threshold_markers(
    session: ModelSession, thresholds: dict[str, float] | None
) -> dict[str, float]:
    task = session.task
    if task is None or task.kind != "binary":
        return {}
    markers = {h.slot.value: 0.5 for h in session.handles()}
    if thresholds:
        markers.update(thresholds)
    return markers


def is_flat(curve: PdpCurve, spread: float = FLAT_SPREAD) -> bool:
    """True when every series varies less than ``spread`` across the sweep.

    A flat local curve on every inspected point is the signature of a model
    that never reads the feature.
    """
    for s in curve.series:
        if not s.ys:
            continue
        if max(s.ys) - min(s.ys) >= spread:
            return False
    return True
