"""Canonical JSON payload builders shared by the CLI and the HTTP service.

Both surfaces emit bytes from :func:`dump_bytes` over these builders, which
is what makes their outputs byte-identical for identical inputs. Numbers are
plain decimal doubles; missing values are null; NaN is never emitted.
"""

from __future__ import annotations

import json

from .binning import BinAssignment
from .counterfactual import CounterfactualResult, DistanceNorm
from .dataset import Snapshot
from .fairness import SliceMetrics, Strategy, ThresholdAssignment
from .metrics import ConfusionMatrix, RocCurve
from .models import ModelHandle, Prediction, ScoreDelta
from .pdp import PdpCurve
from .stats import FeatureStatistics


def dump(payload) -> str:
    return json.dumps(payload, separators=(",", ":"), ensure_ascii=False, allow_nan=False)


def dump_bytes(payload) -> bytes:
    return dump(payload).encode("utf-8")


def stats_payload(
    version: int, stats: list[FeatureStatistics], order: list[str] | None = None
) -> dict:
    features = {}
    for s in stats:
        entry: dict = {
            "kind": s.kind.value,
            "count": s.count,
            "missing": s.missing_count,
            "distinct": s.distinct_count,
            "non_uniformity": s.non_uniformity,
            "display_mode": s.display_mode.value,
        }
        if s.kind.value == "numeric":
            entry.update(
                {
                    "min": s.minimum,
                    "max": s.maximum,
                    "mean": s.mean,
                    "std": s.std,
                    "zeros": s.zero_count,
                    "histogram": {"edges": s.histogram_edges, "counts": s.histogram_counts},
                }
            )
        else:
            entry.update(
                {"value_counts": s.value_counts, "most_frequent": s.most_frequent}
            )
        features[s.name] = entry
    payload = {"version": version, "features": features}
    if order is not None:
        payload["order"] = order
    return payload


def point_payload(snap: Snapshot, point_id: int) -> dict:
    p = snap.point(point_id)
    values = {name: p.values[i] for i, name in enumerate(snap.feature_names)}
    derived = {
        name: vals.get(p.id)
        for name, vals in snap.derived
        if p.id in vals
    }
    out = {
        "id": p.id,
        "origin": p.origin.value,
        "values": values,
    }
    if p.duplicated_from is not None:
        out["duplicated_from"] = p.duplicated_from
    if derived:
        out["derived"] = derived
    return out


def points_payload(snap: Snapshot, offset: int, limit: int) -> dict:
    window = snap.points[offset : offset + limit]
    return {
        "version": snap.version,
        "total": snap.n_points,
        "offset": offset,
        "points": [point_payload(snap, p.id) for p in window],
    }


def prediction_payload(pred: Prediction, delta: ScoreDelta | None) -> dict:
    out: dict = {"output": pred.to_json()}
    if delta is None:
        out["delta"] = None
        out["direction"] = None
    else:
        out["delta"] = list(delta.delta) if isinstance(delta.delta, tuple) else delta.delta
        out["direction"] = delta.direction
    return out


def bins_payload(assignment: BinAssignment, snap: Snapshot) -> dict:
    def axis(a):
        if a is None:
            return None
        out = {"feature": a.feature}
        if a.edges is not None:
            out["edges"] = a.edges
        return out

    return {
        "version": assignment.version,
        "x": axis(assignment.x),
        "y": axis(assignment.y),
        "color": axis(assignment.color),
        "points": [
            {
                "id": p.id,
                "x": assignment.x.bins[i] if assignment.x else None,
                "y": assignment.y.bins[i] if assignment.y else None,
                "color": assignment.color.bins[i] if assignment.color else None,
            }
            for i, p in enumerate(snap.points)
        ],
    }


def counterfactual_payload(
    version: int, result: CounterfactualResult, norm: DistanceNorm, model: str
) -> dict:
    payload: dict = {
        "version": version,
        "model": model,
        "norm": norm.value,
        "anchor_id": result.anchor_id,
        "found": result.found,
        "match_id": result.match_id,
        "distance": result.distance,
        "deltas": None,
    }
    if result.found and result.deltas is not None:
        payload["deltas"] = [
            {
                "feature": d.feature,
                "anchor": d.anchor_value,
                "match": d.match_value,
                "distance": d.distance,
                "differs": d.distance > 0.0,
            }
            for d in result.deltas
        ]
    return payload


def pdp_payload(version: int, curve: PdpCurve) -> dict:
    return {
        "version": version,
        "feature": curve.feature,
        "kind": curve.kind.value,
        "xs": curve.xs,
        "series": [
            {"model": s.model, "class": s.class_label, "ys": s.ys} for s in curve.series
        ],
        "original_value": curve.original_value,
        "thresholds": curve.thresholds,
    }


def confusion_payload(c: ConfusionMatrix) -> dict:
    return {"tp": c.tp, "fp": c.fp, "tn": c.tn, "fn": c.fn}


def slice_payload(m: SliceMetrics) -> dict:
    return {
        "slice_key": m.key,
        "count": m.count,
        "threshold": m.threshold,
        "confusion": confusion_payload(m.confusion),
        "accuracy": m.confusion.accuracy,
        "fp_pct": m.confusion.fp_pct,
        "fn_pct": m.confusion.fn_pct,
    }


def roc_payload(roc: RocCurve) -> dict:
    return {
        "points": [
            [roc.fpr[i], roc.tpr[i], roc.thresholds[i]] for i in range(len(roc.fpr))
        ],
        "auc": roc.auc,
    }


def performance_payload(
    version: int,
    task: str,
    cost_ratio: float | None,
    model_rows: list[dict],
) -> dict:
    payload = {"version": version, "task": task, "models": model_rows}
    if cost_ratio is not None:
        payload["cost_ratio"] = cost_ratio
    return payload


def fairness_payload(
    version: int,
    strategy: Strategy,
    cost_ratio: float,
    epsilon: float,
    model_rows: list[dict],
) -> dict:
    return {
        "version": version,
        "strategy": strategy.value,
        "cost_ratio": cost_ratio,
        "epsilon": epsilon,
        "models": model_rows,
    }


def assignment_row(
    model: ModelHandle,
    assignment: ThresholdAssignment,
    slices: list[SliceMetrics],
) -> dict:
    return {
        "model": model.slot.value,
        "slices": [slice_payload(m) for m in slices],
        "achieved_disparity": assignment.achieved_disparity,
        "parity_met": assignment.parity_met,
    }
