import numpy as np
import pytest

from modelprobe import (
    AnalysisError,
    candidate_thresholds,
    confusion_at,
    optimize_single_threshold,
    regression_metrics,
    roc_curve,
)


def naive_confusion(scores, labels, t):
    tp = fp = tn = fn = 0
    for s, l in zip(scores, labels):
        predicted = s >= t
        if predicted and l == 1:
            tp += 1
        elif predicted and l == 0:
            fp += 1
        elif not predicted and l == 1:
            fn += 1
        else:
            tn += 1
    return tp, fp, tn, fn


def mann_whitney_auc(scores, labels):
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l == 0]
    wins = 0.0
    for p in pos:
        for n in neg:
            if p > n:
                wins += 1.0
            elif p == n:
                wins += 0.5
    return wins / (len(pos) * len(neg))


class TestConfusion:
    def test_perfectly_separated(self):
        c = confusion_at([0.2, 0.4, 0.6, 0.8], [0, 0, 1, 1], 0.5)
        assert (c.tp, c.tn, c.fp, c.fn) == (2, 2, 0, 0)
        assert c.accuracy == 1.0

    def test_threshold_zero_predicts_all_positive(self):
        c = confusion_at([0.2, 0.4, 0.6, 0.8], [0, 0, 1, 1], 0.0)
        assert c.fp == 2  # every negative
        assert c.fn == 0

    def test_matches_naive_counting(self):
        rng = np.random.default_rng(1)
        scores = rng.uniform(size=50)
        labels = rng.integers(0, 2, size=50)
        for t in [0.0, 0.3, 0.5, 0.72, 1.0]:
            c = confusion_at(scores, labels, t)
            assert (c.tp, c.fp, c.tn, c.fn) == tuple(
                naive_confusion(scores, labels, t)[i] for i in (0, 1, 2, 3)
            )

    def test_empty_input_all_zero(self):
        c = confusion_at([], [], 0.5)
        assert c.total == 0
        assert c.accuracy == 0.0
        assert c.fp_pct == 0.0
        assert c.fn_pct == 0.0

    def test_percentage_denominators(self):
        c = confusion_at([0.9, 0.9], [1, 1], 0.5)  # no negatives
        assert c.fp_pct == 0.0
        c = confusion_at([0.9, 0.1], [0, 0], 0.5)
        assert c.fp_pct == 0.5


class TestRegressionMetrics:
    def test_exact_predictions(self):
        m = regression_metrics([1.0, 2.0], [1.0, 2.0])
        assert m == {"mean_error": 0.0, "mean_absolute_error": 0.0, "mean_squared_error": 0.0}

    def test_signed_cancellation(self):
        m = regression_metrics([2.0, 0.0], [1.0, 1.0])  # errors +1, -1
        assert m["mean_error"] == 0.0
        assert m["mean_absolute_error"] == 1.0
        assert m["mean_squared_error"] == 1.0

    def test_matches_direct_formulas(self):
        rng = np.random.default_rng(2)
        preds = rng.normal(size=40)
        targets = rng.normal(size=40)
        m = regression_metrics(preds, targets)
        err = preds - targets
        assert m["mean_error"] == pytest.approx(float(np.mean(err)), abs=1e-12)
        assert m["mean_absolute_error"] == pytest.approx(float(np.mean(np.abs(err))), abs=1e-12)
        assert m["mean_squared_error"] == pytest.approx(float(np.mean(err**2)), abs=1e-12)

    def test_empty_errors(self):
        with pytest.raises(AnalysisError):
            regression_metrics([], [])


class TestCandidates:
    def test_midpoints_plus_sentinels(self):
        cands = candidate_thresholds([0.2, 0.4, 0.6, 0.8])
        assert list(cands) == [0.0, (0.2 + 0.4) / 2, 0.5, (0.6 + 0.8) / 2, 1.0]

    def test_constant_scores(self):
        assert list(candidate_thresholds([0.4, 0.4])) == [0.0, 1.0]

    def test_complete_no_other_threshold_changes_confusion(self):
        rng = np.random.default_rng(3)
        scores = rng.uniform(size=25)
        labels = rng.integers(0, 2, size=25)
        cands = candidate_thresholds(scores)
        seen = {naive_confusion(scores, labels, t) for t in cands}
        probe = {naive_confusion(scores, labels, t) for t in np.linspace(0, 1, 501)}
        assert probe <= seen


class TestRoc:
    def test_perfect_separation_auc_one(self):
        roc = roc_curve([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
        assert roc.auc == pytest.approx(1.0, abs=1e-12)

    def test_inverted_labels_auc_zero(self):
        roc = roc_curve([0.1, 0.2, 0.8, 0.9], [1, 1, 0, 0])
        assert roc.auc == pytest.approx(0.0, abs=1e-12)

    def test_endpoints_and_monotonicity(self):
        rng = np.random.default_rng(4)
        scores = rng.uniform(0.01, 0.99, size=40)
        labels = rng.integers(0, 2, size=40)
        roc = roc_curve(scores, labels)
        assert roc.thresholds[0] == 0.0
        assert roc.thresholds[-1] == 1.0
        assert (roc.fpr[0], roc.tpr[0]) == (1.0, 1.0)
        assert (roc.fpr[-1], roc.tpr[-1]) == (0.0, 0.0)
        assert all(a >= b for a, b in zip(roc.fpr, roc.fpr[1:]))
        assert all(a >= b for a, b in zip(roc.tpr, roc.tpr[1:]))

    def test_auc_matches_pairwise_oracle(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n = int(rng.integers(5, 30))
            scores = rng.uniform(size=n).round(2)  # rounding provokes ties
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                labels[0] = 1 - labels[0]
            roc = roc_curve(scores, labels)
            assert roc.auc == pytest.approx(mann_whitney_auc(scores, labels), abs=1e-9)

    def test_single_class_error_names_missing_class(self):
        with pytest.raises(AnalysisError, match="negative"):
            roc_curve([0.2, 0.8], [1, 1])
        with pytest.raises(AnalysisError, match="positive"):
            roc_curve([0.2, 0.8], [0, 0])


class TestSingleThreshold:
    def test_separable_example_picks_midpoint(self):
        t = optimize_single_threshold([0.2, 0.4, 0.6, 0.8], [0, 0, 1, 1], 1.0)
        assert t == 0.5
        assert confusion_at([0.2, 0.4, 0.6, 0.8], [0, 0, 1, 1], t).accuracy == 1.0

    def test_accuracy_matches_exhaustive_sweep(self):
        rng = np.random.default_rng(6)
        for _ in range(20):
            n = int(rng.integers(4, 60))
            scores = rng.uniform(size=n)
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                labels[0] = 1 - labels[0]
            t = optimize_single_threshold(scores, labels, 1.0)
            got = confusion_at(scores, labels, t).accuracy
            best = max(
                confusion_at(scores, labels, c).accuracy
                for c in candidate_thresholds(scores)
            )
            assert got == best

    def test_threshold_nondecreasing_in_cost_ratio(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            n = int(rng.integers(6, 50))
            scores = rng.uniform(size=n)
            labels = rng.integers(0, 2, size=n)
            if labels.sum() in (0, n):
                labels[0] = 1 - labels[0]
            chosen = [
                optimize_single_threshold(scores, labels, r)
                for r in (0.25, 0.5, 1.0, 2.0, 4.0)
            ]
            assert all(a <= b for a, b in zip(chosen, chosen[1:]))

    def test_tie_breaks_to_smallest_candidate(self):
        # scores symmetric, cost equal at several candidates
        t = optimize_single_threshold([0.5, 0.5], [1, 0], 1.0)
        assert t == 0.0  # cost 1 everywhere; first candidate wins

    def test_single_class_requires_flag(self):
        with pytest.raises(AnalysisError):
            optimize_single_threshold([0.2, 0.8], [1, 1], 1.0)
        t = optimize_single_threshold([0.2, 0.8], [1, 1], 1.0, require_both_classes=False)
        assert t == 0.0  # everything positive minimizes FN with no FP risk
