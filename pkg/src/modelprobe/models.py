"""Black-box prediction backends: builtin weight documents and remote HTTP.

Builtin models are small dense networks described by a portable JSON
document, so analyses stay reproducible without external serving. Remote
models speak a conventional serving protocol: POST {"instances": [...]}
returning {"predictions": [...]} in order. Both sit behind the same
batch-prediction surface with a content-addressed score cache.
"""

from __future__ import annotations

import json
import math
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from . import _kernels
from .dataset import DataPoint
from .errors import ModelSpecError, RemoteModelError, UnknownFeatureError

FLAT_EPS = 1e-12
REMOTE_CHUNK = 64
DEFAULT_FANOUT = 8
DEFAULT_TIMEOUT = 10.0


@dataclass(frozen=True)
class TaskKind:
    kind: str  # "binary" | "multiclass" | "regression"
    num_classes: int = 2

    @classmethod
    def binary(cls) -> "TaskKind":
        return cls("binary", 2)

    @classmethod
    def multiclass(cls, num_classes: int) -> "TaskKind":
        if num_classes < 3:
            raise ModelSpecError("multiclass requires num_classes >= 3")
        return cls("multiclass", num_classes)

    @classmethod
    def regression(cls) -> "TaskKind":
        return cls("regression", 0)

    @classmethod
    def from_json(cls, doc) -> "TaskKind":
        if isinstance(doc, dict) and "type" in doc:
            t = doc["type"]
            if t == "binary":
                return cls.binary()
            if t == "multiclass":
                return cls.multiclass(int(doc.get("num_classes", 0)))
            if t == "regression":
                return cls.regression()
        raise ModelSpecError(f"invalid task descriptor: {doc!r}")

    def to_json(self) -> dict:
        if self.kind == "multiclass":
            return {"type": "multiclass", "num_classes": self.num_classes}
        return {"type": self.kind}


class Slot(Enum):
    MODEL1 = "model1"
    MODEL2 = "model2"


@dataclass(frozen=True)
class Prediction:
    task: TaskKind
    value: float | tuple[float, ...]

    def scalar(self) -> float:
        """Positive-class score (binary), regression value, or top class score."""
        if isinstance(self.value, tuple):
            return max(self.value)
        return self.value

    def to_json(self):
        return list(self.value) if isinstance(self.value, tuple) else self.value


@dataclass(frozen=True)
class ScoreDelta:
    delta: float | tuple[float, ...]
    direction: str  # "up" | "down" | "flat"


def score_delta(before: Prediction, after: Prediction) -> ScoreDelta:
    """Componentwise after - before with a direction for the headline score."""
    if before.task != after.task:
        raise ValueError("cannot compare predictions of different task kinds")
    if isinstance(before.value, tuple):
        delta = tuple(a - b for a, b in zip(after.value, before.value))
        # direction follows the class the point was previously assigned to
        lead = int(np.argmax(before.value))
        headline = delta[lead]
    else:
        delta = after.value - before.value
        headline = delta
    if abs(headline) < FLAT_EPS:
        direction = "flat"
    elif headline > 0:
        direction = "up"
    else:
        direction = "down"
    return ScoreDelta(delta, direction)


# ---------------------------------------------------------------------------
# builtin models
# ---------------------------------------------------------------------------

_ACTIVATIONS = {"relu", "identity"}
_OUTPUTS = {"sigmoid", "softmax", "identity"}
_TASK_OUTPUT = {"binary": "sigmoid", "multiclass": "softmax", "regression": "identity"}


@dataclass
class Layer:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: str


class BuiltinModel:
    """Deterministic dense network over standardized/one-hot encoded features."""

    def __init__(
        self,
        task: TaskKind,
        feature_order: list[str],
        numeric_standardization: dict[str, tuple[float, float]],
        categorical_vocab: dict[str, list[str]],
        layers: list[Layer],
        output: str,
    ):
        self.task = task
        self.feature_order = feature_order
        self.numeric_standardization = numeric_standardization
        self.categorical_vocab = categorical_vocab
        self.layers = layers
        self.output = output
        self._offsets: dict[str, int] = {}
        width = 0
        for name in feature_order:
            self._offsets[name] = width
            width += 1 if name in numeric_standardization else len(categorical_vocab[name])
        self.input_width = width
        self._validate()

    def _validate(self) -> None:
        if self.output not in _OUTPUTS:
            raise ModelSpecError(f"unknown output transform: {self.output!r}")
        if _TASK_OUTPUT[self.task.kind] != self.output:
            raise ModelSpecError(
                f"{self.task.kind} task requires {_TASK_OUTPUT[self.task.kind]} output, got {self.output!r}"
            )
        if not self.layers:
            raise ModelSpecError("model needs at least one layer")
        width = self.input_width
        for i, layer in enumerate(self.layers):
            if layer.activation not in _ACTIVATIONS:
                raise ModelSpecError(f"layer {i}: unknown activation {layer.activation!r}")
            if layer.weights.ndim != 2:
                raise ModelSpecError(f"layer {i}: weights must be a matrix")
            out_dim, in_dim = layer.weights.shape
            if in_dim != width:
                raise ModelSpecError(
                    f"layer {i}: expects input width {in_dim}, previous width is {width}"
                )
            if layer.bias.shape != (out_dim,):
                raise ModelSpecError(
                    f"layer {i}: bias length {layer.bias.shape[0]} does not match {out_dim} outputs"
                )
            if not np.isfinite(layer.weights).all() or not np.isfinite(layer.bias).all():
                raise ModelSpecError(f"layer {i}: non-finite weight or bias")
            width = out_dim
        expected = self.task.num_classes if self.task.kind == "multiclass" else 1
        if width != expected:
            raise ModelSpecError(
                f"final layer width {width} does not match task output width {expected}"
            )
        for name in self.feature_order:
            in_num = name in self.numeric_standardization
            in_cat = name in self.categorical_vocab
            if in_num == in_cat:
                raise ModelSpecError(
                    f"feature {name!r} must appear in exactly one of "
                    "numeric_standardization/categorical_vocab"
                )
            if in_num:
                mean, std = self.numeric_standardization[name]
                if not (math.isfinite(mean) and math.isfinite(std)) or std <= 0:
                    raise ModelSpecError(f"feature {name!r}: std must be finite and > 0")
            elif not self.categorical_vocab[name]:
                raise ModelSpecError(f"feature {name!r}: empty vocabulary")

    def encode(self, points: Sequence[DataPoint], feature_names: Sequence[str]) -> np.ndarray:
        name_to_idx = {n: i for i, n in enumerate(feature_names)}
        X = np.zeros((len(points), self.input_width))
        for name in self.feature_order:
            src = name_to_idx.get(name)
            if src is None:
                raise UnknownFeatureError(f"model input feature {name!r} not in dataset")
            off = self._offsets[name]
            if name in self.numeric_standardization:
                mean, std = self.numeric_standardization[name]
                for i, p in enumerate(points):
                    v = p.values[src]
                    # missing numeric imputes to the mean, i.e. standardized 0
                    X[i, off] = 0.0 if v is None else (v - mean) / std
            else:
                vocab = {v: j for j, v in enumerate(self.categorical_vocab[name])}
                for i, p in enumerate(points):
                    j = vocab.get(points[i].values[src])
                    if j is not None:
                        X[i, off + j] = 1.0
        return X

    def forward(self, X: np.ndarray) -> np.ndarray:
        for layer in self.layers:
            X = _kernels.dense_forward(X, layer.weights, layer.bias, layer.activation == "relu")
        if self.output == "sigmoid":
            return 1.0 / (1.0 + np.exp(-X))
        if self.output == "softmax":
            shifted = X - X.max(axis=1, keepdims=True)
            e = np.exp(shifted)
            return e / e.sum(axis=1, keepdims=True)
        return X

    def predict(self, points: Sequence[DataPoint], feature_names: Sequence[str]) -> list[Prediction]:
        out = self.forward(self.encode(points, feature_names))
        if self.task.kind == "multiclass":
            return [Prediction(self.task, tuple(float(v) for v in row)) for row in out]
        return [Prediction(self.task, float(v)) for v in out[:, 0]]


def parse_builtin_spec(doc: dict | str | bytes) -> BuiltinModel:
    """Parse and validate a builtin weights document (JSON or dict)."""
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as e:
            raise ModelSpecError(f"invalid model JSON: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ModelSpecError("model document must be a JSON object")
    try:
        task = TaskKind.from_json(doc["task"])
        feature_order = list(doc["feature_order"])
        standardization = {
            name: (float(entry["mean"]), float(entry["std"]))
            for name, entry in doc.get("numeric_standardization", {}).items()
        }
        vocab = {
            name: [str(v) for v in values]
            for name, values in doc.get("categorical_vocab", {}).items()
        }
        layers = [
            Layer(
                weights=np.asarray(layer["weights"], dtype=np.float64),
                bias=np.asarray(layer["bias"], dtype=np.float64),
                activation=layer.get("activation", "identity"),
            )
            for layer in doc["layers"]
        ]
        output = doc["output"]
    except (KeyError, TypeError, ValueError) as e:
        raise ModelSpecError(f"malformed model document: {e}") from None
    return BuiltinModel(task, feature_order, standardization, vocab, layers, output)


# ---------------------------------------------------------------------------
# remote models
# ---------------------------------------------------------------------------

class RemoteModel:
    """Client for a serving endpoint; fan-out is bounded and order-preserving."""

    def __init__(
        self,
        url: str,
        task: TaskKind,
        fanout: int = DEFAULT_FANOUT,
        timeout: float = DEFAULT_TIMEOUT,
    ):
        if not url.startswith(("http://", "https://")):
            raise ModelSpecError(f"remote model URL must be http(s): {url!r}")
        self.url = url
        self.task = task
        self.fanout = max(1, fanout)
        self.timeout = timeout

    def _post_chunk(self, instances: list[dict]) -> list[Prediction]:
        import requests

        try:
            resp = requests.post(
                self.url, json={"instances": instances}, timeout=self.timeout
            )
        except requests.RequestException as e:
            raise RemoteModelError(f"endpoint unreachable: {e}", retriable=True) from None
        if resp.status_code != 200:
            raise RemoteModelError(
                f"endpoint returned HTTP {resp.status_code}",
                status=resp.status_code,
                retriable=resp.status_code >= 500,
            )
        try:
            body = resp.json()
        except ValueError:
            raise RemoteModelError("response is not JSON", status=200) from None
        preds = body.get("predictions") if isinstance(body, dict) else None
        if not isinstance(preds, list) or len(preds) != len(instances):
            raise RemoteModelError(
                "response must carry one prediction per instance", status=200
            )
        return [self._parse_prediction(p) for p in preds]

    def _parse_prediction(self, raw) -> Prediction:
        if self.task.kind == "multiclass":
            if not isinstance(raw, list) or len(raw) != self.task.num_classes:
                raise RemoteModelError(
                    f"expected {self.task.num_classes} class scores per prediction", status=200
                )
            vec = tuple(float(v) for v in raw)
            if not all(math.isfinite(v) and 0.0 <= v <= 1.0 for v in vec):
                raise RemoteModelError("class scores must be finite and within [0,1]", status=200)
            if abs(sum(vec) - 1.0) > 1e-6:
                raise RemoteModelError("class scores must sum to 1 within 1e-6", status=200)
            return Prediction(self.task, vec)
        if isinstance(raw, list):
            if len(raw) != 1:
                raise RemoteModelError("expected a single score per prediction", status=200)
            raw = raw[0]
        value = float(raw)
        if not math.isfinite(value):
            raise RemoteModelError("non-finite score", status=200)
        if self.task.kind == "binary" and not 0.0 <= value <= 1.0:
            raise RemoteModelError(f"binary score {value} outside [0,1]", status=200)
        return Prediction(self.task, value)

    def predict(self, points: Sequence[DataPoint], feature_names: Sequence[str]) -> list[Prediction]:
        instances = [
            {name: p.values[i] for i, name in enumerate(feature_names)} for p in points
        ]
        chunks = [
            instances[i : i + REMOTE_CHUNK] for i in range(0, len(instances), REMOTE_CHUNK)
        ]
        if len(chunks) <= 1:
            return self._post_chunk(instances) if instances else []
        with ThreadPoolExecutor(max_workers=min(self.fanout, len(chunks))) as pool:
            results = list(pool.map(self._post_chunk, chunks))
        return [p for chunk in results for p in chunk]


# ---------------------------------------------------------------------------
# registry and caching
# ---------------------------------------------------------------------------

@dataclass
class ModelHandle:
    slot: Slot
    task: TaskKind
    backend: BuiltinModel | RemoteModel
    display_name: str

    @property
    def is_remote(self) -> bool:
        return isinstance(self.backend, RemoteModel)


class ModelSession:
    """Up to two registered models sharing one task kind."""

    def __init__(self, cache_enabled: bool = True, fanout: int = DEFAULT_FANOUT):
        self._slots: dict[Slot, ModelHandle] = {}
        self._caches: dict[Slot, dict[tuple, Prediction]] = {}
        self._cache_lock = threading.Lock()
        self.cache_enabled = cache_enabled
        self.fanout = fanout

    def register(
        self,
        spec_or_url: dict | str | bytes,
        slot: Slot,
        task: TaskKind | None = None,
        display_name: str | None = None,
    ) -> ModelHandle:
        if slot in self._slots:
            raise ModelSpecError(f"slot {slot.value} already holds a model")
        if isinstance(spec_or_url, str) and spec_or_url.startswith(("http://", "https://")):
            backend = RemoteModel(spec_or_url, task or TaskKind.binary(), fanout=self.fanout)
        else:
            backend = parse_builtin_spec(spec_or_url)
        for other in self._slots.values():
            if other.task != backend.task:
                raise ModelSpecError(
                    "all models in a session must share one task kind"
                )
        handle = ModelHandle(
            slot=slot,
            task=backend.task,
            backend=backend,
            display_name=display_name or slot.value,
        )
        self._slots[slot] = handle
        self._caches[slot] = {}
        return handle

    def get(self, slot: Slot) -> ModelHandle:
        handle = self._slots.get(slot)
        if handle is None:
            raise ModelSpecError(f"no model registered in slot {slot.value}")
        return handle

    def handles(self) -> list[ModelHandle]:
        return [self._slots[s] for s in (Slot.MODEL1, Slot.MODEL2) if s in self._slots]

    @property
    def comparison_mode(self) -> bool:
        return len(self._slots) == 2

    @property
    def task(self) -> TaskKind | None:
        handles = self.handles()
        return handles[0].task if handles else None

    def predict_batch(
        self,
        handle: ModelHandle,
        points: Sequence[DataPoint],
        feature_names: Sequence[str],
        use_cache: bool | None = None,
    ) -> list[Prediction]:
        """Predictions in input order; cached by (slot, point content)."""
        cache_on = self.cache_enabled if use_cache is None else use_cache
        cache = self._caches[handle.slot]
        if not cache_on:
            return handle.backend.predict(points, feature_names)
        out: list[Prediction | None] = [None] * len(points)
        misses: list[int] = []
        with self._cache_lock:
            for i, p in enumerate(points):
                hit = cache.get(p.values)
                if hit is not None:
                    out[i] = hit
                else:
                    misses.append(i)
        if misses:
            fresh = handle.backend.predict([points[i] for i in misses], feature_names)
            with self._cache_lock:
                for i, pred in zip(misses, fresh):
                    cache[points[i].values] = pred
                    out[i] = pred
        return out  # type: ignore[return-value]


class ScoreTracker:
    """Per-point score history; the latest delta is the contractual one."""

    def __init__(self):
        self._history: dict[tuple[Slot, int], list[Prediction]] = {}
        self._lock = threading.Lock()

    def record(self, slot: Slot, point_id: int, pred: Prediction) -> ScoreDelta | None:
        with self._lock:
            key = (slot, point_id)
            history = self._history.setdefault(key, [])
            delta = score_delta(history[-1], pred) if history else None
            history.append(pred)
            return delta

    def history(self, slot: Slot, point_id: int) -> list[Prediction]:
        with self._lock:
            return list(self._history.get((slot, point_id), []))
