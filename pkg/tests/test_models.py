import json
import math
import threading
from http.server import BaseHTTPRequestHandler, HTTPServer

import numpy as np
import pytest

from modelprobe import (
    DataPoint,
    ModelSession,
    ModelSpecError,
    Prediction,
    RemoteModelError,
    Slot,
    TaskKind,
    parse_builtin_spec,
    score_delta,
)
from modelprobe.models import ScoreTracker
from helpers import linear_binary_spec, mlp_binary_spec, multiclass_spec, regression_spec


def pt(*values) -> DataPoint:
    return DataPoint(0, tuple(values))


class TestBuiltinValidation:
    def test_valid_two_layer_mlp(self):
        session = ModelSession()
        handle = session.register(mlp_binary_spec(["a", "b"]), Slot.MODEL1)
        assert handle.slot is Slot.MODEL1
        assert handle.task == TaskKind.binary()

    def test_bias_length_mismatch(self):
        spec = linear_binary_spec(["a", "b", "c", "d"], [1, 1, 1, 1])
        spec["layers"][0]["weights"] = [[1, 2, 3, 4]] * 3  # 3x4
        spec["layers"][0]["bias"] = [0.0] * 5
        with pytest.raises(ModelSpecError, match="bias"):
            parse_builtin_spec(spec)

    def test_chain_mismatch(self):
        spec = mlp_binary_spec(["a", "b"], hidden=4)
        spec["layers"][1]["weights"] = [[1.0, 2.0, 3.0]]  # expects width 3, got 4
        with pytest.raises(ModelSpecError, match="width"):
            parse_builtin_spec(spec)

    def test_non_finite_weight(self):
        spec = linear_binary_spec(["a"], [math.inf])
        with pytest.raises(ModelSpecError, match="non-finite"):
            parse_builtin_spec(spec)

    def test_output_must_match_task(self):
        spec = linear_binary_spec(["a"], [1.0])
        spec["output"] = "identity"
        with pytest.raises(ModelSpecError, match="sigmoid"):
            parse_builtin_spec(spec)

    def test_zero_std_rejected(self):
        spec = linear_binary_spec(["a"], [1.0], standardization={"a": (0.0, 0.0)})
        with pytest.raises(ModelSpecError, match="std"):
            parse_builtin_spec(spec)

    def test_duplicate_slot_rejected(self):
        session = ModelSession()
        session.register(linear_binary_spec(["a"], [1.0]), Slot.MODEL1)
        with pytest.raises(ModelSpecError, match="slot"):
            session.register(linear_binary_spec(["a"], [2.0]), Slot.MODEL1)

    def test_task_kinds_must_agree(self):
        session = ModelSession()
        session.register(linear_binary_spec(["a"], [1.0]), Slot.MODEL1)
        with pytest.raises(ModelSpecError, match="task"):
            session.register(regression_spec(["a"], [1.0]), Slot.MODEL2)

    def test_two_slots_enable_comparison_mode(self):
        session = ModelSession()
        session.register(linear_binary_spec(["a"], [1.0]), Slot.MODEL1)
        assert not session.comparison_mode
        session.register(linear_binary_spec(["a"], [2.0]), Slot.MODEL2)
        assert session.comparison_mode


class TestBuiltinInference:
    def predict_one(self, spec, point, names):
        session = ModelSession()
        handle = session.register(spec, Slot.MODEL1)
        return session.predict_batch(handle, [point], names)[0]

    def test_sigmoid_of_zero(self):
        spec = linear_binary_spec(["x"], [2.0])
        assert self.predict_one(spec, pt(0.0), ["x"]).value == 0.5

    def test_sigmoid_of_ln3(self):
        spec = linear_binary_spec(["x"], [1.0])
        pred = self.predict_one(spec, pt(math.log(3)), ["x"])
        assert pred.value == pytest.approx(0.75, abs=1e-15)

    def test_standardization_applied(self):
        spec = linear_binary_spec(["x"], [1.0], standardization={"x": (10.0, 2.0)})
        assert self.predict_one(spec, pt(10.0), ["x"]).value == 0.5

    def test_missing_numeric_imputes_to_mean(self):
        spec = linear_binary_spec(["x"], [3.0], standardization={"x": (10.0, 2.0)})
        missing = self.predict_one(spec, pt(None), ["x"])
        at_mean = self.predict_one(spec, pt(10.0), ["x"])
        assert missing.value == at_mean.value == 0.5

    def test_categorical_one_hot_and_unseen(self):
        spec = linear_binary_spec(["c"], [1.0, -1.0], vocab={"c": ["a", "b"]})
        assert self.predict_one(spec, pt("a"), ["c"]).value > 0.5
        assert self.predict_one(spec, pt("b"), ["c"]).value < 0.5
        assert self.predict_one(spec, pt("zzz"), ["c"]).value == 0.5  # all-zero encoding
        assert self.predict_one(spec, pt(None), ["c"]).value == 0.5

    def test_batch_equals_serial_bitwise(self):
        # 100-point batch vs 100 single-point calls
        rng = np.random.default_rng(0)
        spec = mlp_binary_spec(["a", "b", "c"], hidden=8, seed=1)
        session = ModelSession(cache_enabled=False)
        handle = session.register(spec, Slot.MODEL1)
        points = [
            DataPoint(i, tuple(float(v) for v in rng.normal(size=3))) for i in range(100)
        ]
        names = ["a", "b", "c"]
        batch = session.predict_batch(handle, points, names)
        serial = [session.predict_batch(handle, [p], names)[0] for p in points]
        assert [p.value for p in batch] == [p.value for p in serial]

    def test_deterministic_and_pure(self):
        spec = mlp_binary_spec(["a", "b"], seed=3)
        session = ModelSession(cache_enabled=False)
        handle = session.register(spec, Slot.MODEL1)
        p = pt(0.3, -1.2)
        a = session.predict_batch(handle, [p], ["a", "b"])[0]
        b = session.predict_batch(handle, [p], ["a", "b"])[0]
        assert a.value == b.value

    def test_cache_transparency(self):
        spec = mlp_binary_spec(["a", "b"], seed=5)
        rng = np.random.default_rng(2)
        points = [
            DataPoint(i, tuple(float(v) for v in rng.normal(size=2))) for i in range(30)
        ]
        cached = ModelSession(cache_enabled=True)
        uncached = ModelSession(cache_enabled=False)
        h1 = cached.register(spec, Slot.MODEL1)
        h2 = uncached.register(spec, Slot.MODEL1)
        names = ["a", "b"]
        first = cached.predict_batch(h1, points, names)
        second = cached.predict_batch(h1, points, names)  # all hits
        plain = uncached.predict_batch(h2, points, names)
        assert [p.value for p in first] == [p.value for p in second]
        assert [p.value for p in first] == [p.value for p in plain]

    def test_linear_score_monotone_in_positive_weight_feature(self):
        spec = linear_binary_spec(["x", "y"], [1.5, -0.5])
        session = ModelSession()
        handle = session.register(spec, Slot.MODEL1)
        xs = np.linspace(-3, 3, 20)
        preds = session.predict_batch(
            handle, [DataPoint(i, (float(x), 1.0)) for i, x in enumerate(xs)], ["x", "y"]
        )
        values = [p.value for p in preds]
        assert all(a < b for a, b in zip(values, values[1:]))

    def test_multiclass_softmax_sums_to_one(self):
        spec = multiclass_spec(["a", "b"], 4)
        session = ModelSession()
        handle = session.register(spec, Slot.MODEL1)
        rng = np.random.default_rng(4)
        points = [
            DataPoint(i, tuple(float(v) for v in rng.normal(size=2))) for i in range(20)
        ]
        for pred in session.predict_batch(handle, points, ["a", "b"]):
            assert len(pred.value) == 4
            assert sum(pred.value) == pytest.approx(1.0, abs=1e-6)
            assert all(0.0 <= v <= 1.0 for v in pred.value)


class TestScoreDelta:
    def test_paper_style_flip(self):
        before = Prediction(TaskKind.binary(), 0.336)
        after = Prediction(TaskKind.binary(), 0.991)
        d = score_delta(before, after)
        assert d.delta == pytest.approx(0.655, abs=1e-12)
        assert d.direction == "up"

    def test_flat(self):
        p = Prediction(TaskKind.binary(), 0.42)
        assert score_delta(p, p).direction == "flat"

    def test_down(self):
        d = score_delta(
            Prediction(TaskKind.binary(), 0.8), Prediction(TaskKind.binary(), 0.2)
        )
        assert d.delta == pytest.approx(-0.6, abs=1e-12)
        assert d.direction == "down"

    def test_task_mismatch(self):
        with pytest.raises(ValueError):
            score_delta(
                Prediction(TaskKind.binary(), 0.5),
                Prediction(TaskKind.regression(), 0.5),
            )

    def test_multiclass_direction_follows_before_argmax(self):
        t = TaskKind.multiclass(3)
        before = Prediction(t, (0.5, 0.3, 0.2))
        after = Prediction(t, (0.2, 0.5, 0.3))
        d = score_delta(before, after)
        assert d.direction == "down"  # class 0 fell
        assert d.delta == pytest.approx((-0.3, 0.2, 0.1), abs=1e-12)

    def test_tracker_keeps_history_and_latest_delta(self):
        tracker = ScoreTracker()
        t = TaskKind.binary()
        assert tracker.record(Slot.MODEL1, 3, Prediction(t, 0.4)) is None
        delta = tracker.record(Slot.MODEL1, 3, Prediction(t, 0.9))
        assert delta.direction == "up"
        assert len(tracker.history(Slot.MODEL1, 3)) == 2


class _Handler(BaseHTTPRequestHandler):
    behavior = "ok"

    def do_POST(self):
        length = int(self.headers["Content-Length"])
        body = json.loads(self.rfile.read(length))
        instances = body["instances"]
        if self.behavior == "echo":
            # score mirrors the instance so ordering is observable
            payload = {"predictions": [inst["x"] / 1000.0 for inst in instances]}
            data = json.dumps(payload).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(data)
        elif self.behavior == "ok":
            payload = {"predictions": [0.25 for _ in instances]}
            data = json.dumps(payload).encode()
            self.send_response(200)
            self.send_header("Content-Type", "application/json")
            self.end_headers()
            self.wfile.write(data)
        elif self.behavior == "error":
            self.send_response(503)
            self.end_headers()
        elif self.behavior == "short":
            data = json.dumps({"predictions": [0.5]}).encode()
            self.send_response(200)
            self.end_headers()
            self.wfile.write(data)
        else:
            self.send_response(200)
            self.end_headers()
            self.wfile.write(b"not json")

    def log_message(self, *args):
        pass


@pytest.fixture
def remote_server():
    server = HTTPServer(("127.0.0.1", 0), _Handler)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    yield f"http://127.0.0.1:{server.server_port}/predict", _Handler
    server.shutdown()


class TestRemote:
    def test_remote_predictions_in_order(self, remote_server):
        url, handler = remote_server
        handler.behavior = "ok"
        session = ModelSession()
        handle = session.register(url, Slot.MODEL1, task=TaskKind.binary())
        points = [pt(1.0), pt(2.0)]
        preds = session.predict_batch(handle, points, ["x"])
        assert [p.value for p in preds] == [0.25, 0.25]

    def test_remote_http_error_is_retriable_with_status(self, remote_server):
        url, handler = remote_server
        handler.behavior = "error"
        session = ModelSession()
        handle = session.register(url, Slot.MODEL1, task=TaskKind.binary())
        with pytest.raises(RemoteModelError) as err:
            session.predict_batch(handle, [pt(1.0)], ["x"])
        assert err.value.status == 503
        assert err.value.retriable

    def test_remote_malformed_response_is_protocol_error(self, remote_server):
        url, handler = remote_server
        handler.behavior = "garbage"
        session = ModelSession()
        handle = session.register(url, Slot.MODEL1, task=TaskKind.binary())
        with pytest.raises(RemoteModelError, match="JSON"):
            session.predict_batch(handle, [pt(1.0)], ["x"])

    def test_remote_wrong_count_is_protocol_error(self, remote_server):
        url, handler = remote_server
        handler.behavior = "short"
        session = ModelSession()
        handle = session.register(url, Slot.MODEL1, task=TaskKind.binary())
        with pytest.raises(RemoteModelError, match="per instance"):
            session.predict_batch(handle, [pt(1.0), pt(2.0)], ["x"])

    def test_unreachable_endpoint(self):
        session = ModelSession()
        handle = session.register("http://127.0.0.1:9/predict", Slot.MODEL1, task=TaskKind.binary())
        handle.backend.timeout = 0.5
        with pytest.raises(RemoteModelError, match="unreachable"):
            session.predict_batch(handle, [pt(1.0)], ["x"])

    def test_chunked_fanout_preserves_order(self, remote_server):
        url, handler = remote_server
        handler.behavior = "echo"
        session = ModelSession()
        handle = session.register(url, Slot.MODEL1, task=TaskKind.binary())
        points = [DataPoint(i, (float(i),)) for i in range(150)]  # 3 chunks of 64
        preds = session.predict_batch(handle, points, ["x"])
        assert [p.value for p in preds] == [i / 1000.0 for i in range(150)]

    def test_bad_url_rejected(self):
        session = ModelSession()
        with pytest.raises(ModelSpecError):
            session.register("ftp://example.com/x", Slot.MODEL1, task=TaskKind.binary())
