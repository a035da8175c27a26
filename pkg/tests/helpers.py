"""Builders shared across the test suite."""

from __future__ import annotations

import numpy as np

from modelprobe import Dataset, DataPoint, FeatureKind, FeatureSchema, Origin


def linear_binary_spec(
    features: list[str],
    weights: list[float],
    bias: float = 0.0,
    standardization: dict[str, tuple[float, float]] | None = None,
    vocab: dict[str, list[str]] | None = None,
) -> dict:
    """Single-layer sigmoid model; weights align with the encoded width."""
    standardization = standardization or {}
    vocab = vocab or {}
    std_doc = {}
    for f in features:
        if f in vocab:
            continue
        mean, std = standardization.get(f, (0.0, 1.0))
        std_doc[f] = {"mean": mean, "std": std}
    return {
        "task": {"type": "binary"},
        "feature_order": features,
        "numeric_standardization": std_doc,
        "categorical_vocab": vocab,
        "layers": [{"weights": [weights], "bias": [bias], "activation": "identity"}],
        "output": "sigmoid",
    }


def regression_spec(
    features: list[str],
    weights: list[float],
    bias: float = 0.0,
) -> dict:
    return {
        "task": {"type": "regression"},
        "feature_order": features,
        "numeric_standardization": {f: {"mean": 0.0, "std": 1.0} for f in features},
        "categorical_vocab": {},
        "layers": [{"weights": [weights], "bias": [bias], "activation": "identity"}],
        "output": "identity",
    }


def multiclass_spec(features: list[str], num_classes: int, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(num_classes, len(features))).round(3)
    return {
        "task": {"type": "multiclass", "num_classes": num_classes},
        "feature_order": features,
        "numeric_standardization": {f: {"mean": 0.0, "std": 1.0} for f in features},
        "categorical_vocab": {},
        "layers": [
            {"weights": w.tolist(), "bias": [0.0] * num_classes, "activation": "identity"}
        ],
        "output": "softmax",
    }


def mlp_binary_spec(features: list[str], hidden: int = 4, seed: int = 0) -> dict:
    rng = np.random.default_rng(seed)
    w1 = rng.normal(size=(hidden, len(features))).round(3)
    w2 = rng.normal(size=(1, hidden)).round(3)
    return {
        "task": {"type": "binary"},
        "feature_order": features,
        "numeric_standardization": {f: {"mean": 0.0, "std": 1.0} for f in features},
        "categorical_vocab": {},
        "layers": [
            {"weights": w1.tolist(), "bias": [0.1] * hidden, "activation": "relu"},
            {"weights": w2.tolist(), "bias": [0.0], "activation": "identity"},
        ],
        "output": "sigmoid",
    }


def dataset_from_columns(columns: dict[str, list]) -> Dataset:
    """Build a dataset directly from name -> values (None = missing)."""
    schema = []
    for name, values in columns.items():
        numeric = all(
            v is None or (isinstance(v, (int, float)) and not isinstance(v, bool))
            for v in values
        )
        schema.append(
            FeatureSchema(name, FeatureKind.NUMERIC if numeric else FeatureKind.CATEGORICAL)
        )
    n = len(next(iter(columns.values())))
    points = []
    for i in range(n):
        vals = []
        for name, values in columns.items():
            v = values[i]
            if v is None:
                vals.append(None)
            elif isinstance(v, (int, float)) and not isinstance(v, bool):
                vals.append(float(v))
            else:
                vals.append(str(v))
        points.append(DataPoint(i, tuple(vals), Origin.LOADED))
    return Dataset(schema, points)


def random_mixed_dataset(
    rng: np.random.Generator, n: int, n_num: int, n_cat: int, missing_num: float = 0.05
) -> Dataset:
    """Random dataset with a sprinkle of missing values, for oracle tests."""
    columns: dict[str, list] = {}
    for j in range(n_num):
        vals = rng.normal(loc=rng.uniform(-5, 5), scale=rng.uniform(0.5, 3), size=n)
        col = [float(v) for v in vals]
        for i in range(n):
            if rng.random() < missing_num:
                col[i] = None
        columns[f"num{j}"] = col
    for j in range(n_cat):
        k = int(rng.integers(2, 6))
        values = [f"v{c}" for c in range(k)]
        col = [values[int(i)] for i in rng.integers(0, k, size=n)]
        for i in range(n):
            if rng.random() < 0.05:
                col[i] = None
        columns[f"cat{j}"] = col
    return dataset_from_columns(columns)
