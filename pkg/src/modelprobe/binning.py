"""Facet binning: maps every point to (x_bin, y_bin, color_key).

One operation backs confusion-matrix layouts, 1D/2D histograms and
small-multiple groupings: numeric axes get uniform-width index bins over
[min, max] (max in the last bin), categorical axes bin by value, and
missing values always land in a dedicated "(missing)" bin so views conserve
the point count. Axes may reference schema features, derived features, or
caller-supplied model fields (predicted class, correctness, error).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .dataset import MISSING_BIN, Dataset, FeatureKind, Snapshot, as_snapshot
from .errors import UnknownFeatureError

DEFAULT_BIN_COUNT = 10


@dataclass(frozen=True)
class BinningSpec:
    x_feature: str | None = None
    y_feature: str | None = None
    numeric_bin_count: int = DEFAULT_BIN_COUNT
    color_feature: str | None = None

    def __post_init__(self):
        if self.numeric_bin_count < 1:
            raise ValueError("numeric_bin_count must be >= 1")
        if self.x_feature is not None and self.x_feature == self.y_feature:
            raise ValueError("x and y features must be distinct")


@dataclass(frozen=True)
class ModelField:
    """Per-point values computed from a model, usable as a binning axis."""

    values: Sequence
    kind: FeatureKind


@dataclass
class AxisBins:
    feature: str
    # int bin index for numeric axes, value string for categorical,
    # MISSING_BIN for missing; one entry per point in point order
    bins: list
    edges: list[float] | None = None


@dataclass
class BinAssignment:
    version: int
    x: AxisBins | None
    y: AxisBins | None
    color: AxisBins | None

    def rows(self) -> list[tuple]:
        n = len(self.x.bins) if self.x else (len(self.y.bins) if self.y else 0)
        out = []
        for i in range(n):
            out.append(
                (
                    self.x.bins[i] if self.x else None,
                    self.y.bins[i] if self.y else None,
                    self.color.bins[i] if self.color else None,
                )
            )
        return out


def _numeric_axis(name: str, col: np.ndarray, nbins: int) -> AxisBins:
    present = col[~np.isnan(col)]
    if present.shape[0] == 0:
        return AxisBins(name, [MISSING_BIN] * col.shape[0], edges=[])
    lo = float(present.min())
    hi = float(present.max())
    idx = _kernels.bin_assign(col, lo, hi, nbins)
    bins = [MISSING_BIN if b < 0 else int(b) for b in idx]
    if hi > lo:
        edges = [lo + (hi - lo) * i / nbins for i in range(nbins + 1)]
    else:
        edges = [lo, hi]
    return AxisBins(name, bins, edges=edges)


def _axis(snap: Snapshot, name: str, nbins: int, model_fields: dict[str, ModelField] | None) -> AxisBins:
    if model_fields and name in model_fields:
        field = model_fields[name]
        if len(field.values) != snap.n_points:
            raise ValueError(f"model field {name!r} has {len(field.values)} values for {snap.n_points} points")
        if field.kind is FeatureKind.NUMERIC:
            col = np.array(
                [np.nan if v is None else float(v) for v in field.values], dtype=np.float64
            )
            return _numeric_axis(name, col, nbins)
        return AxisBins(name, [MISSING_BIN if v is None else str(v) for v in field.values])
    if name in snap.derived_names():
        return _numeric_axis(name, snap.numeric_column(name), nbins)
    feat = snap.schema_for(name)
    if feat.kind is FeatureKind.NUMERIC:
        return _numeric_axis(name, snap.numeric_column(name), nbins)
    idx = snap.feature_index(name)
    return AxisBins(
        name,
        [MISSING_BIN if p.values[idx] is None else p.values[idx] for p in snap.points],
    )


def assign_bins(
    data: Dataset | Snapshot,
    spec: BinningSpec,
    model_fields: dict[str, ModelField] | None = None,
) -> BinAssignment:
    """Pure function of (snapshot, spec, model fields); output in point order."""
    snap = as_snapshot(data)

    def resolve(name: str | None) -> AxisBins | None:
        if name is None:
            return None
        known = (
            snap.has_feature(name)
            or name in snap.derived_names()
            or (model_fields is not None and name in model_fields)
        )
        if not known:
            raise UnknownFeatureError(f"unknown feature: {name!r}")
        return _axis(snap, name, spec.numeric_bin_count, model_fields)

    return BinAssignment(
        version=snap.version,
        x=resolve(spec.x_feature),
        y=resolve(spec.y_feature),
        color=resolve(spec.color_feature),
    )


def bin_label(axis: AxisBins, bin_value) -> str:
    """Human-readable label for one bin of an axis (used for slice keys)."""
    if bin_value == MISSING_BIN or axis.edges is None:
        return str(bin_value)
    i = int(bin_value)
    if len(axis.edges) < 2 or axis.edges[0] == axis.edges[-1]:
        return f"[{axis.edges[0]:g}]" if axis.edges else MISSING_BIN
    lo = axis.edges[i]
    hi = axis.edges[i + 1]
    closer = "]" if i == len(axis.edges) - 2 else ")"
    return f"[{lo:g},{hi:g}{closer}"
