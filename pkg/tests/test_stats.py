import math

import numpy as np
import pytest

from modelprobe import (
    DisplayMode,
    SortKey,
    compute_feature_statistics,
    ingest,
    sort_features,
)
from helpers import dataset_from_columns


def stats_by_name(ds):
    return {s.name: s for s in compute_feature_statistics(ds)}


def test_numeric_closed_forms():
    ds = dataset_from_columns({"v": list(range(1, 26))})
    s = stats_by_name(ds)["v"]
    assert s.minimum == 1.0
    assert s.maximum == 25.0
    assert s.mean == 13.0
    assert s.std == pytest.approx(math.sqrt(52.0), abs=1e-12)  # population std
    assert sum(s.histogram_counts) == 25
    assert s.display_mode is DisplayMode.CDF_LINE  # 25 distinct > 20


def test_histogram_sums_to_non_missing():
    ds = dataset_from_columns({"v": [1.0, 2.0, None, 4.0, None]})
    s = stats_by_name(ds)["v"]
    assert s.missing_count == 2
    assert sum(s.histogram_counts) == 3


def test_ninety_percent_zeros_signature():
    ds = dataset_from_columns({"gain": [0.0] * 9 + [100.0]})
    s = stats_by_name(ds)["gain"]
    assert s.zero_count == 9
    assert s.histogram_counts[0] == 9
    assert s.histogram_counts[-1] == 1
    assert s.non_uniformity > 0.5


def test_uniform_categorical_non_uniformity_zero():
    ds = dataset_from_columns({"c": ["a", "b", "c", "d"]})
    assert stats_by_name(ds)["c"].non_uniformity == 0.0


def test_single_valued_non_uniformity_one():
    ds = dataset_from_columns({"c": ["a", "a", "a"], "v": [7.0, 7.0, 7.0]})
    by = stats_by_name(ds)
    assert by["c"].non_uniformity == 1.0
    assert by["v"].non_uniformity == 1.0


def test_non_uniformity_bounds_random():
    rng = np.random.default_rng(7)
    for _ in range(25):
        vals = rng.normal(size=rng.integers(2, 60)).tolist()
        ds = dataset_from_columns({"v": vals})
        s = stats_by_name(ds)["v"]
        assert 0.0 <= s.non_uniformity <= 1.0
        assert s.minimum <= s.mean <= s.maximum
        assert s.std >= 0.0
        assert sum(s.histogram_counts) == len(vals)


def test_display_mode_flips_at_21_distinct():
    at_20 = dataset_from_columns({"v": [float(i) for i in range(20)]})
    at_21 = dataset_from_columns({"v": [float(i) for i in range(21)]})
    assert stats_by_name(at_20)["v"].display_mode is DisplayMode.HISTOGRAM
    assert stats_by_name(at_21)["v"].display_mode is DisplayMode.CDF_LINE


def test_categorical_value_counts_and_most_frequent():
    ds = dataset_from_columns({"c": ["b", "a", "b", None, "c", "b", "a"]})
    s = stats_by_name(ds)["c"]
    assert s.value_counts == {"b": 3, "a": 2, "c": 1}
    assert s.most_frequent == "b"
    assert s.missing_count == 1
    assert s.distinct_count == 3


def test_most_frequent_tie_breaks_to_smaller_value():
    ds = dataset_from_columns({"c": ["z", "a", "z", "a"]})
    assert stats_by_name(ds)["c"].most_frequent == "a"


def test_sort_by_non_uniformity_descending():
    ds = dataset_from_columns(
        {
            "skewed": [0.0] * 9 + [100.0],
            "uniform": [float(i % 4) for i in range(10)],
        }
    )
    stats = compute_feature_statistics(ds)
    assert sort_features(stats, SortKey.NON_UNIFORMITY) == ["skewed", "uniform"]


def test_sort_tie_preserves_schema_order():
    ds = dataset_from_columns({"b": [1.0, 2.0], "a": [5.0, 6.0]})
    stats = compute_feature_statistics(ds)
    assert sort_features(stats, SortKey.NON_UNIFORMITY) == ["b", "a"]
    assert sort_features(stats, SortKey.ALPHABETICAL) == ["a", "b"]


def test_sort_by_missing_or_zero_sums_both():
    ds = dataset_from_columns(
        {
            "zeros": [0.0] * 9 + [1.0],
            "missing": [None, None] + [float(i) for i in range(8)],
        }
    )
    stats = compute_feature_statistics(ds)
    assert sort_features(stats, SortKey.MISSING_OR_ZERO) == ["zeros", "missing"]


def test_stats_refresh_after_edit():
    ds = ingest("v\n1\n2\n3", "csv")
    assert stats_by_name(ds)["v"].maximum == 3.0
    ds.edit_point(2, {"v": 30.0})
    assert stats_by_name(ds)["v"].maximum == 30.0


def test_schema_counts_refreshed_with_stats():
    ds = ingest("v\n1\n0\n3", "csv")
    compute_feature_statistics(ds)
    assert ds.schema[0].zero_count == 1
    ds.edit_point(0, {"v": 0.0})
    compute_feature_statistics(ds)
    assert ds.schema[0].zero_count == 2


def test_all_missing_numeric_feature():
    ds = dataset_from_columns({"v": [None, None], "w": [1.0, 2.0]})
    s = stats_by_name(ds)["v"]
    assert s.missing_count == 2
    assert s.distinct_count == 0
    assert s.non_uniformity == 1.0
