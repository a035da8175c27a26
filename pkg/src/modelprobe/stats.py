"""Per-feature summary statistics and feature ordering."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import _kernels
from .dataset import Dataset, FeatureKind, Snapshot, as_snapshot, refresh_schema_counts

HISTOGRAM_BINS = 10
# features with more distinct values than this render as a CDF line
HISTOGRAM_DISTINCT_LIMIT = 20


class DisplayMode(Enum):
    HISTOGRAM = "histogram"
    CDF_LINE = "cdf"


class SortKey(Enum):
    NON_UNIFORMITY = "non-uniformity"
    MISSING_OR_ZERO = "missing"
    ALPHABETICAL = "alpha"


@dataclass
class FeatureStatistics:
    name: str
    kind: FeatureKind
    count: int
    missing_count: int
    distinct_count: int
    non_uniformity: float
    display_mode: DisplayMode
    # numeric only
    minimum: float | None = None
    maximum: float | None = None
    mean: float | None = None
    std: float | None = None
    zero_count: int = 0
    histogram_edges: list[float] | None = None
    histogram_counts: list[int] | None = None
    # categorical only
    value_counts: dict[str, int] | None = None
    most_frequent: str | None = None


def non_uniformity(counts: np.ndarray) -> float:
    """1 minus normalized Shannon entropy over nonempty categories/bins.

    0 for a uniform distribution over k >= 2 values, 1 when everything falls
    in a single value.
    """
    counts = counts[counts > 0]
    k = counts.shape[0]
    if k <= 1:
        return 1.0
    p = counts / counts.sum()
    entropy = float(-(p * np.log(p)).sum())
    value = 1.0 - entropy / math.log(k)
    if abs(value) < 1e-12:  # uniform distributions read exactly 0
        return 0.0
    return min(max(value, 0.0), 1.0)


def _numeric_stats(feat, col: np.ndarray, n: int) -> FeatureStatistics:
    present = col[~np.isnan(col)]
    missing = n - present.shape[0]
    distinct = int(np.unique(present).shape[0])
    if present.shape[0] == 0:
        return FeatureStatistics(
            name=feat.name,
            kind=feat.kind,
            count=n,
            missing_count=missing,
            distinct_count=0,
            non_uniformity=1.0,
            display_mode=DisplayMode.HISTOGRAM,
            zero_count=0,
            histogram_edges=[],
            histogram_counts=[],
        )
    lo = float(present.min())
    hi = float(present.max())
    bins = _kernels.bin_assign(present, lo, hi, HISTOGRAM_BINS)
    counts = np.bincount(bins, minlength=HISTOGRAM_BINS)
    if hi > lo:
        edges = [lo + (hi - lo) * i / HISTOGRAM_BINS for i in range(HISTOGRAM_BINS + 1)]
    else:
        edges = [lo, hi]
        counts = counts[:1]
    mode = (
        DisplayMode.HISTOGRAM
        if distinct <= HISTOGRAM_DISTINCT_LIMIT
        else DisplayMode.CDF_LINE
    )
    return FeatureStatistics(
        name=feat.name,
        kind=feat.kind,
        count=n,
        missing_count=missing,
        distinct_count=distinct,
        non_uniformity=non_uniformity(counts),
        display_mode=mode,
        minimum=lo,
        maximum=hi,
        mean=float(present.mean()),
        std=float(present.std()),  # population std, ddof=0
        zero_count=int((present == 0.0).sum()),
        histogram_edges=edges,
        histogram_counts=[int(c) for c in counts],
    )


def _categorical_stats(feat, snap: Snapshot, n: int) -> FeatureStatistics:
    codes, values = snap.categorical_codes(feat.name)
    missing = int((codes == -1).sum())
    counts = np.bincount(codes[codes >= 0], minlength=len(values))
    # count desc, then value asc: deterministic ordering for export
    order = sorted(range(len(values)), key=lambda i: (-counts[i], values[i]))
    value_counts = {values[i]: int(counts[i]) for i in order}
    most_frequent = values[order[0]] if values else None
    distinct = len(values)
    mode = (
        DisplayMode.HISTOGRAM
        if distinct <= HISTOGRAM_DISTINCT_LIMIT
        else DisplayMode.CDF_LINE
    )
    return FeatureStatistics(
        name=feat.name,
        kind=feat.kind,
        count=n,
        missing_count=missing,
        distinct_count=distinct,
        non_uniformity=non_uniformity(counts) if distinct else 1.0,
        display_mode=mode,
        value_counts=value_counts,
        most_frequent=most_frequent,
    )


def compute_feature_statistics(data: Dataset | Snapshot) -> list[FeatureStatistics]:
    """Summary statistics for every schema feature of a snapshot.

    Also refreshes the schema's distinct/missing/zero counts so stale counts
    never outlive an edit. Cached per snapshot version.
    """
    snap = as_snapshot(data)
    if snap._stats is not None:
        return snap._stats
    n = snap.n_points
    out: list[FeatureStatistics] = []
    for feat in snap.schema:
        if feat.kind is FeatureKind.NUMERIC:
            out.append(_numeric_stats(feat, snap.numeric_column(feat.name), n))
        else:
            out.append(_categorical_stats(feat, snap, n))
    refresh_schema_counts(snap, snap.schema)
    snap._stats = out
    return out


def sort_features(stats: list[FeatureStatistics], key: SortKey) -> list[str]:
    """Order feature names by a sort key; ties keep schema order (stable)."""
    indexed = list(enumerate(stats))
    if key is SortKey.NON_UNIFORMITY:
        indexed.sort(key=lambda pair: -pair[1].non_uniformity)
    elif key is SortKey.MISSING_OR_ZERO:
        indexed.sort(key=lambda pair: -(pair[1].missing_count + pair[1].zero_count))
    elif key is SortKey.ALPHABETICAL:
        indexed.sort(key=lambda pair: pair[1].name)
    else:
        raise ValueError(f"unknown sort key: {key!r}")
    return [s.name for _, s in indexed]
