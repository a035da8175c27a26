import numpy as np
import pytest

from modelprobe import BinningSpec, FeatureKind, UnknownFeatureError, assign_bins
from modelprobe.binning import MISSING_BIN, ModelField, bin_label
from helpers import dataset_from_columns


def test_boundary_rule_half_open_max_in_last_bin():
    ds = dataset_from_columns({"v": [0.0, 5.0, 10.0]})
    out = assign_bins(ds, BinningSpec(x_feature="v", numeric_bin_count=2))
    # [0,5) and [5,10]: 0 -> bin 0; 5 -> bin 1; max lands in the last bin
    assert out.x.bins == [0, 1, 1]


def test_default_ten_bins():
    ds = dataset_from_columns({"v": [float(i) for i in range(100)]})
    out = assign_bins(ds, BinningSpec(x_feature="v"))
    assert max(b for b in out.x.bins if b != MISSING_BIN) == 9
    assert len(out.x.edges) == 11


def test_missing_gets_dedicated_bin():
    ds = dataset_from_columns({"v": [1.0, None, 3.0], "c": ["a", "b", None]})
    out = assign_bins(ds, BinningSpec(x_feature="v", y_feature="c"))
    assert out.x.bins[1] == MISSING_BIN
    assert out.y.bins[2] == MISSING_BIN
    assert out.y.bins[0] == "a"


def test_categorical_bins_by_value():
    ds = dataset_from_columns({"c": ["m", "f", "m"]})
    out = assign_bins(ds, BinningSpec(x_feature="c"))
    assert out.x.bins == ["m", "f", "m"]


def test_confusion_matrix_layout_from_model_fields():
    ds = dataset_from_columns({"label": ["1", "0", "1", "0"]})
    fields = {
        "model1_class": ModelField(["1", "1", "0", "0"], FeatureKind.CATEGORICAL)
    }
    out = assign_bins(
        ds, BinningSpec(x_feature="label", y_feature="model1_class"), fields
    )
    assert out.x.bins == ["1", "0", "1", "0"]
    assert out.y.bins == ["1", "1", "0", "0"]


def test_2d_histogram_matches_per_point_recomputation():
    # brute-force oracle: recompute each point's bin straight from the rule
    rng = np.random.default_rng(11)
    values = rng.uniform(-3, 7, size=60).tolist()
    cats = [str(c) for c in rng.integers(0, 3, size=60)]
    values[5] = None
    cats[9] = None
    ds = dataset_from_columns({"age": values, "sex": cats})
    nbins = 7
    out = assign_bins(ds, BinningSpec(x_feature="sex", y_feature="age", numeric_bin_count=nbins))

    present = [v for v in values if v is not None]
    lo, hi = min(present), max(present)
    for i in range(60):
        assert out.x.bins[i] == (MISSING_BIN if cats[i] is None else cats[i])
        if values[i] is None:
            assert out.y.bins[i] == MISSING_BIN
        else:
            expect = int(np.floor((values[i] - lo) * (nbins / (hi - lo))))
            expect = min(max(expect, 0), nbins - 1)
            assert out.y.bins[i] == expect


def test_assign_bins_pure_recomputation_identical():
    rng = np.random.default_rng(3)
    ds = dataset_from_columns({"v": rng.normal(size=40).tolist()})
    spec = BinningSpec(x_feature="v", numeric_bin_count=5)
    a = assign_bins(ds, spec)
    b = assign_bins(ds, spec)
    assert a.x.bins == b.x.bins
    assert a.x.edges == b.x.edges


def test_unknown_feature_errors():
    ds = dataset_from_columns({"v": [1.0]})
    with pytest.raises(UnknownFeatureError):
        assign_bins(ds, BinningSpec(x_feature="nope"))


def test_spec_validation():
    with pytest.raises(ValueError):
        BinningSpec(x_feature="a", y_feature="a")
    with pytest.raises(ValueError):
        BinningSpec(numeric_bin_count=0)


def test_derived_feature_usable_as_axis():
    ds = dataset_from_columns({"v": [1.0, 2.0, 3.0]})
    name = ds.add_derived_feature("dist", {0: 0.0, 1: 5.0, 2: 10.0})
    out = assign_bins(ds, BinningSpec(x_feature=name, numeric_bin_count=2))
    assert out.x.bins == [0, 1, 1]


def test_constant_numeric_single_bin():
    ds = dataset_from_columns({"v": [4.0, 4.0]})
    out = assign_bins(ds, BinningSpec(x_feature="v", numeric_bin_count=3))
    assert out.x.bins == [0, 0]


def test_bin_labels():
    ds = dataset_from_columns({"v": [0.0, 5.0, 10.0]})
    out = assign_bins(ds, BinningSpec(x_feature="v", numeric_bin_count=2))
    assert bin_label(out.x, 0) == "[0,5)"
    assert bin_label(out.x, 1) == "[5,10]"
    assert bin_label(out.x, MISSING_BIN) == MISSING_BIN
