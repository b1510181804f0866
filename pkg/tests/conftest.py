"""Shared test fixtures: rule-based oracles, hand-built boundary maps, and
a local hard-label HTTP endpoint."""
import json
import threading
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer

import numpy as np
import pytest

from boundaryscan.boundary import BoundaryMap
from boundaryscan.geometry import PlotBounds
from boundaryscan.oracle import Oracle


class RuleOracle(Oracle):
    """Oracle wrapping an arbitrary vectorized labeling rule."""

    def __init__(self, fn, input_dim, n_classes):
        self.fn = fn
        self.input_dim = input_dim
        self.n_classes = n_classes
        self.calls = 0
        self.rows_seen = 0

    def _predict(self, x):
        self.calls += 1
        self.rows_seen += len(x)
        return np.asarray(self.fn(x), dtype=np.int64)


def constant_oracle(label, input_dim, n_classes):
    return RuleOracle(
        lambda x: np.full(len(x), label, dtype=np.int64), input_dim, n_classes
    )


def mk_bmap(labels, anchor_labels, n_classes, anchor_coords=None):
    """BoundaryMap from a raw label matrix; geometry fields are dummies."""
    labels = np.asarray(labels, dtype=np.int64)
    s = labels.shape[0]
    if anchor_coords is None:
        anchor_coords = np.zeros((3, 2))
    return BoundaryMap(
        labels=labels,
        bounds=PlotBounds(0.0, float(s), 0.0, float(s), 1.0),
        anchor_coords=np.asarray(anchor_coords, dtype=np.float64),
        anchor_labels=tuple(int(v) for v in anchor_labels),
        n_classes=n_classes,
    )


class _PredictHandler(BaseHTTPRequestHandler):
    def log_message(self, *args):
        pass

    def do_POST(self):
        state = self.server.state
        state["requests"] += 1
        body = json.loads(self.rfile.read(int(self.headers["Content-Length"])))
        state["bodies"].append(body)
        if self.path != "/v1/predict":
            self.send_error(404)
            return
        if state["fail_next"] > 0:
            state["fail_next"] -= 1
            self.send_error(500)
            return
        b, d = body["shape"]
        rows = np.asarray(body["data"], dtype=np.float64).reshape(b, d)
        labels = state["rule"](rows)
        if state["truncate"]:
            labels = labels[:-1]
        payload = json.dumps({"labels": [int(v) for v in labels]}).encode()
        self.send_response(200)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(payload)))
        self.end_headers()
        self.wfile.write(payload)


@pytest.fixture
def predict_server():
    """Local endpoint speaking the remote oracle protocol.

    Yields (url, state); state lets tests inject failures and inspect the
    request bodies that actually went over the wire.
    """
    state = {
        "rule": lambda rows: (rows[:, 0] > 0).astype(np.int64),
        "fail_next": 0,
        "truncate": False,
        "requests": 0,
        "bodies": [],
    }
    server = ThreadingHTTPServer(("127.0.0.1", 0), _PredictHandler)
    server.state = state
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    try:
        yield f"http://127.0.0.1:{server.server_port}", state
    finally:
        server.shutdown()
        thread.join()
