import itertools

import numpy as np
import pytest

from modelprobe import (
    AnalysisError,
    ModelSession,
    SliceSpec,
    Slot,
    Strategy,
    build_slices,
    candidate_thresholds,
    confusion_at,
    optimize_fairness,
    optimize_single_threshold,
    optimize_thresholds,
)
from modelprobe.fairness import (
    GroundTruthBinding,
    Slice,
    binary_labels,
    confusion_with_slice_thresholds,
    slice_metrics,
)
from helpers import dataset_from_columns, linear_binary_spec


def two_slices(scores_a, labels_a, scores_b, labels_b):
    na = len(scores_a)
    scores = np.array(list(scores_a) + list(scores_b), dtype=np.float64)
    labels = np.array(list(labels_a) + list(labels_b), dtype=np.int64)
    slices = [
        Slice("a", np.arange(na, dtype=np.int64)),
        Slice("b", np.arange(na, len(scores), dtype=np.int64)),
    ]
    return scores, labels, slices


def quantity(strategy, scores, labels, t):
    c = confusion_at(scores, labels, t)
    if strategy is Strategy.DEMOGRAPHIC_PARITY:
        return (c.tp + c.fp) / c.total
    if strategy is Strategy.EQUAL_OPPORTUNITY:
        return c.tp / (c.tp + c.fn) if (c.tp + c.fn) else 0.0
    return c.accuracy


def product_space_best_disparity(strategy, scores, labels, slices):
    """Exhaustive search over every candidate-threshold pair (oracle)."""
    per_slice = []
    for sl in slices:
        s, l = scores[sl.indices], labels[sl.indices]
        per_slice.append([quantity(strategy, s, l, t) for t in candidate_thresholds(s)])
    best = np.inf
    for combo in itertools.product(*per_slice):
        d = max(combo) - min(combo)
        if d < best:
            best = d
    return best


class TestSlicing:
    def make(self):
        return dataset_from_columns(
            {
                "sex": ["m", "f", "m", "f", "m", "f"],
                "race": ["x", "x", "y", "y", "x", "y"],
                "age": [20.0, 30.0, 40.0, 50.0, 60.0, 70.0],
                "label": ["1", "0", "1", "0", "1", "0"],
            }
        )

    def test_single_feature_partition(self):
        slices = build_slices(self.make(), SliceSpec(("sex",)))
        assert {s.key for s in slices} == {"sex=m", "sex=f"}
        assert sum(len(s.indices) for s in slices) == 6

    def test_intersection_of_two_features(self):
        slices = build_slices(self.make(), SliceSpec(("sex", "race")))
        assert len(slices) == 4
        assert sum(len(s.indices) for s in slices) == 6  # partition

    def test_numeric_feature_bucketed(self):
        slices = build_slices(self.make(), SliceSpec(("age",), numeric_bin_count=2))
        assert {s.key for s in slices} == {"age=[20,45)", "age=[45,70]"}

    def test_spec_arity(self):
        with pytest.raises(AnalysisError):
            SliceSpec(("a", "b", "c"))


class TestSliceMetrics:
    def session_for(self, ds, weights=None):
        session = ModelSession()
        handle = session.register(
            linear_binary_spec(["score_in"], weights or [4.0]), Slot.MODEL1
        )
        return session, handle

    def make(self):
        # score_in drives the model; label/group are ground truth and slices
        rng = np.random.default_rng(13)
        n = 40
        group = ["a" if i % 2 else "b" for i in range(n)]
        score_in = rng.normal(size=n).round(2).tolist()
        label = ["1" if (v > 0) == (g == "a") else "0" for v, g in zip(score_in, group)]
        return dataset_from_columns({"score_in": score_in, "group": group, "label": label})

    def test_single_slice_equals_whole_dataset(self):
        ds = self.make()
        session, handle = self.session_for(ds)
        binding = GroundTruthBinding("label", "1")
        whole = slice_metrics(ds, session, handle, binding, None, 0.5)
        assert len(whole) == 1
        assert whole[0].count == 40
        snap = ds.snapshot()
        labels = binary_labels(snap, binding)
        preds = session.predict_batch(handle, snap.points, snap.feature_names)
        scores = np.array([p.value for p in preds])
        direct = confusion_at(scores, labels, 0.5)
        assert whole[0].confusion == direct

    def test_per_slice_counts_sum_to_dataset_size(self):
        ds = self.make()
        session, handle = self.session_for(ds)
        rows = slice_metrics(
            ds, session, handle, GroundTruthBinding("label", "1"), SliceSpec(("group",)), 0.5
        )
        assert sum(r.count for r in rows) == 40

    def test_slice_confusions_sum_to_whole_dataset_matrix(self):
        ds = self.make()
        session, handle = self.session_for(ds)
        binding = GroundTruthBinding("label", "1")
        spec = SliceSpec(("group",))
        thresholds = {"group=a": 0.3, "group=b": 0.7}
        rows = slice_metrics(ds, session, handle, binding, spec, thresholds)
        summed = rows[0].confusion
        for r in rows[1:]:
            summed = summed + r.confusion
        snap = ds.snapshot()
        labels = binary_labels(snap, binding)
        preds = session.predict_batch(handle, snap.points, snap.feature_names)
        scores = np.array([p.value for p in preds])
        whole = confusion_with_slice_thresholds(
            scores, labels, build_slices(snap, spec), thresholds
        )
        assert summed == whole

    def test_sorted_by_count_desc_by_default(self):
        ds = dataset_from_columns(
            {
                "g": ["a"] * 5 + ["b"] * 3 + ["c"] * 2,
                "label": ["1", "0"] * 5,
                "score_in": [0.1 * i for i in range(10)],
            }
        )
        session, handle = self.session_for(ds)
        rows = slice_metrics(
            ds, session, handle, GroundTruthBinding("label", "1"), SliceSpec(("g",)), 0.5
        )
        assert [r.key for r in rows] == ["g=a", "g=b", "g=c"]
        alpha = slice_metrics(
            ds, session, handle, GroundTruthBinding("label", "1"), SliceSpec(("g",)), 0.5,
            sort="alpha",
        )
        assert [r.key for r in alpha] == ["g=a", "g=b", "g=c"]


class TestStrategies:
    def test_identical_slices_reduce_to_equal_thresholds(self):
        scores_a = [0.1, 0.3, 0.6, 0.9]
        labels_a = [0, 0, 1, 1]
        scores, labels, slices = two_slices(scores_a, labels_a, scores_a, labels_a)
        for strategy in Strategy:
            out = optimize_thresholds(scores, labels, slices, strategy)
            ts = list(out.thresholds.values())
            assert ts[0] == ts[1]
            if out.achieved_disparity is not None:
                assert out.achieved_disparity == 0.0
                assert out.parity_met

    def test_single_threshold_is_global_optimum(self):
        rng = np.random.default_rng(17)
        scores = rng.uniform(size=30)
        labels = rng.integers(0, 2, size=30)
        labels[0], labels[1] = 0, 1
        slices = [
            Slice("a", np.arange(15, dtype=np.int64)),
            Slice("b", np.arange(15, 30, dtype=np.int64)),
        ]
        out = optimize_thresholds(scores, labels, slices, Strategy.SINGLE, 1.0)
        t = optimize_single_threshold(scores, labels, 1.0)
        assert out.global_threshold == t

    def test_group_cost_never_exceeds_single_cost(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            n = 40
            scores = rng.uniform(size=n)
            labels = rng.integers(0, 2, size=n)
            labels[0], labels[1] = 0, 1
            half = n // 2
            slices = [
                Slice("a", np.arange(half, dtype=np.int64)),
                Slice("b", np.arange(half, n, dtype=np.int64)),
            ]
            for r in (0.5, 1.0, 2.0):
                single = optimize_thresholds(scores, labels, slices, Strategy.SINGLE, r)
                group = optimize_thresholds(scores, labels, slices, Strategy.GROUP, r)

                def total_cost(assignment):
                    cost = 0.0
                    for sl in slices:
                        c = confusion_at(
                            scores[sl.indices],
                            labels[sl.indices],
                            assignment.thresholds[sl.key],
                        )
                        cost += r * c.fp + c.fn
                    return cost

                assert total_cost(group) <= total_cost(single) + 1e-12

    def test_demographic_parity_direction_on_shifted_scores(self):
        # slice a: scores shifted high, high base rate; slice b: low
        n = 20
        scores_a = [0.5 + 0.5 * (i + 0.5) / n for i in range(n)]
        scores_b = [0.5 * (i + 0.5) / n for i in range(n)]
        labels_a = [1] * 14 + [0] * 6
        labels_b = [1] * 4 + [0] * 16
        scores, labels, slices = two_slices(scores_a, labels_a, scores_b, labels_b)
        out = optimize_thresholds(scores, labels, slices, Strategy.DEMOGRAPHIC_PARITY)
        assert out.achieved_disparity <= 0.01
        assert out.thresholds["a"] >= out.thresholds["b"]

    @pytest.mark.parametrize(
        "strategy",
        [Strategy.DEMOGRAPHIC_PARITY, Strategy.EQUAL_OPPORTUNITY, Strategy.EQUAL_ACCURACY],
    )
    def test_target_scan_matches_product_space_oracle(self, strategy):
        rng = np.random.default_rng(23)
        for _ in range(6):
            na, nb = int(rng.choice([10, 20, 25])), int(rng.choice([10, 20, 25]))
            scores_a = rng.uniform(size=na).round(3)
            scores_b = rng.uniform(size=nb).round(3)
            labels_a = (rng.uniform(size=na) < 0.5).astype(int)
            labels_b = (rng.uniform(size=nb) < 0.5).astype(int)
            scores, labels, slices = two_slices(scores_a, labels_a, scores_b, labels_b)
            out = optimize_thresholds(scores, labels, slices, strategy)
            want = product_space_best_disparity(strategy, scores, labels, slices)
            assert out.achieved_disparity == pytest.approx(want, abs=1e-9)

    def test_parity_gap_not_worse_than_any_uniform_threshold(self):
        rng = np.random.default_rng(29)
        scores = rng.uniform(size=40).round(3)
        labels = rng.integers(0, 2, size=40)
        slices = [
            Slice("a", np.arange(20, dtype=np.int64)),
            Slice("b", np.arange(20, 40, dtype=np.int64)),
        ]
        out = optimize_thresholds(scores, labels, slices, Strategy.DEMOGRAPHIC_PARITY)
        for t in np.linspace(0, 1, 101):
            rates = [
                quantity(
                    Strategy.DEMOGRAPHIC_PARITY,
                    scores[sl.indices],
                    labels[sl.indices],
                    float(t),
                )
                for sl in slices
            ]
            assert out.achieved_disparity <= max(rates) - min(rates) + 1e-12

    def test_group_strategies_need_two_slices(self):
        scores = np.array([0.2, 0.8])
        labels = np.array([0, 1])
        slices = [Slice("all", np.arange(2, dtype=np.int64))]
        with pytest.raises(AnalysisError):
            optimize_thresholds(scores, labels, slices, Strategy.GROUP)

    def test_thresholds_stay_in_unit_interval(self):
        rng = np.random.default_rng(31)
        scores = rng.uniform(size=30)
        labels = rng.integers(0, 2, size=30)
        labels[:2] = [0, 1]
        slices = [
            Slice("a", np.arange(15, dtype=np.int64)),
            Slice("b", np.arange(15, 30, dtype=np.int64)),
        ]
        for strategy in Strategy:
            out = optimize_thresholds(scores, labels, slices, strategy)
            for t in out.thresholds.values():
                assert 0.0 <= t <= 1.0


class TestOptimizeFairnessEndToEnd:
    def test_two_models_optimized_independently(self):
        ds = dataset_from_columns(
            {
                "x": [0.1 * i - 1.0 for i in range(20)],
                "g": ["a", "b"] * 10,
                "label": ["1" if i % 3 else "0" for i in range(20)],
            }
        )
        session = ModelSession()
        session.register(linear_binary_spec(["x"], [2.0]), Slot.MODEL1)
        session.register(linear_binary_spec(["x"], [-1.0]), Slot.MODEL2)
        out = optimize_fairness(
            ds,
            session,
            GroundTruthBinding("label", "1"),
            SliceSpec(("g",)),
            Strategy.GROUP,
        )
        assert set(out) == {"model1", "model2"}
        assert out["model1"].thresholds != out["model2"].thresholds

    def test_non_binary_task_rejected(self):
        from helpers import regression_spec

        ds = dataset_from_columns({"x": [1.0, 2.0], "label": [1.0, 2.0]})
        session = ModelSession()
        session.register(regression_spec(["x"], [1.0]), Slot.MODEL1)
        with pytest.raises(AnalysisError, match="binary"):
            optimize_fairness(
                ds,
                session,
                GroundTruthBinding("label", "1"),
                None,
                Strategy.SINGLE,
            )
