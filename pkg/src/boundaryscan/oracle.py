"""Hard-label oracle interface and backends.

Every classifier the scanner touches is a black box that maps input vectors
to top-1 class indices. Nothing in this package reads logits or gradients;
keeping the interface hard-label-only is what makes results meaningful for
API-gated models.

Backends: synthetic centroid models (see synthlab), tabulated replay from an
MXT file, and a remote HTTP endpoint. Remote oracles are wrapped in a
write-through label cache and a serializing adapter by ``load_oracle``.
"""
from __future__ import annotations

import hashlib
import threading
import time
from abc import ABC, abstractmethod
from collections.abc import Mapping

import numpy as np
import requests

from . import mxt
from .errors import (
    BackendUnavailable,
    ConfigError,
    ShapeMismatch,
    TransportError,
)


def content_hash64(data: bytes) -> int:
    """64-bit content hash used for cache and replay keys."""
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


class Oracle(ABC):
    """Deterministic hard-label classifier over flat input vectors."""

    n_classes: int
    input_dim: int

    def predict_batch(self, inputs) -> np.ndarray:
        """Labels for a non-empty batch of rows, order preserving.

        Splitting a batch into sub-batches in any way yields the identical
        concatenated label sequence; backends are written to honor that.
        """
        x = np.asarray(inputs)
        if x.ndim != 2:
            raise ShapeMismatch(f"expected a 2D batch, got shape {x.shape}")
        if x.shape[0] == 0:
            raise ShapeMismatch("empty batch")
        if x.shape[1] != self.input_dim:
            raise ShapeMismatch(
                f"inputs have dimension {x.shape[1]}, oracle expects {self.input_dim}"
            )
        if not np.issubdtype(x.dtype, np.floating):
            x = x.astype(np.float64)
        return np.asarray(self._predict(x), dtype=np.int64)

    @abstractmethod
    def _predict(self, x: np.ndarray) -> np.ndarray:
        """Backend hook; receives a validated float batch."""


def predict_batch(oracle: Oracle, inputs) -> np.ndarray:
    """Module-level alias for Oracle.predict_batch."""
    return oracle.predict_batch(inputs)


class TabulatedOracle(Oracle):
    """Replays recorded labels for an exact set of inputs.

    Rows are keyed by the 64-bit hash of their canonical float64 bytes; a
    query outside the table raises ConfigError since the table evidently
    does not cover the workload.
    """

    def __init__(self, samples, labels, n_classes: int | None = None):
        samples = np.ascontiguousarray(samples, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        if samples.ndim != 2 or len(samples) != len(labels):
            raise ConfigError("tabulated oracle needs 2D samples and matching labels")
        self.input_dim = samples.shape[1]
        self.n_classes = int(n_classes) if n_classes is not None else int(labels.max()) + 1
        if labels.min() < 0 or labels.max() >= self.n_classes:
            raise ConfigError("tabulated labels out of range")
        self._table = {
            content_hash64(row.tobytes()): int(lab) for row, lab in zip(samples, labels)
        }

    @classmethod
    def from_mxt(cls, path, n_classes: int | None = None) -> "TabulatedOracle":
        """Load a (K, d+1) tensor whose last column holds the labels."""
        tensor = mxt.read_tensor(path)
        if tensor.ndim != 2 or tensor.shape[1] < 2:
            raise ConfigError(f"tabulated tensor must be (K, d+1), got {tensor.shape}")
        return cls(tensor[:, :-1], tensor[:, -1].astype(np.int64), n_classes)

    def _predict(self, x):
        rows = np.ascontiguousarray(x, dtype=np.float64)
        out = np.empty(len(rows), dtype=np.int64)
        for i, row in enumerate(rows):
            key = content_hash64(row.tobytes())
            try:
                out[i] = self._table[key]
            except KeyError:
                raise ConfigError("input not present in tabulated oracle") from None
        return out


class RemoteOracle(Oracle):
    """HTTP hard-label endpoint.

    Protocol: POST {base_url}/v1/predict with JSON
    ``{"shape": [B, d], "data": [B*d floats, row-major]}``; the endpoint
    answers ``{"labels": [B ints]}`` with HTTP 200. Floats are serialized
    as shortest round-trip decimals. Each request carries at most ``batch``
    rows. Failures (connection, non-200, malformed body) are retried
    ``retries`` times in total with exponential backoff starting at 200 ms,
    then raise TransportError; a failed batch aborts the scan.
    """

    BACKOFF_START = 0.2

    def __init__(
        self,
        url: str,
        n_classes: int,
        input_dim: int,
        batch: int = 256,
        timeout: float = 10.0,
        retries: int = 3,
        session=None,
    ):
        if batch < 1 or retries < 1:
            raise ConfigError("remote batch and retries must be >= 1")
        self.url = url.rstrip("/")
        self.n_classes = int(n_classes)
        self.input_dim = int(input_dim)
        self.batch = int(batch)
        self.timeout = float(timeout)
        self.retries = int(retries)
        self._session = session if session is not None else requests.Session()

    def check_reachable(self) -> None:
        """One zero-vector request; raises BackendUnavailable on failure."""
        try:
            self._request(np.zeros((1, self.input_dim)))
        except TransportError as exc:
            raise BackendUnavailable(f"endpoint {self.url} unreachable: {exc}") from exc

    def _predict(self, x):
        out = np.empty(len(x), dtype=np.int64)
        for start in range(0, len(x), self.batch):
            chunk = x[start : start + self.batch]
            out[start : start + len(chunk)] = self._request(chunk)
        return out

    def _request(self, chunk) -> list[int]:
        rows = np.asarray(chunk, dtype=np.float64)
        body = {
            "shape": [int(rows.shape[0]), int(rows.shape[1])],
            "data": rows.ravel().tolist(),
        }
        failure = "no attempt made"
        for attempt in range(self.retries):
            if attempt:
                time.sleep(self.BACKOFF_START * 2 ** (attempt - 1))
            try:
                resp = self._session.post(
                    self.url + "/v1/predict", json=body, timeout=self.timeout
                )
            except requests.RequestException as exc:
                failure = f"transport failure: {exc}"
                continue
            if resp.status_code != 200:
                failure = f"HTTP {resp.status_code}"
                continue
            try:
                labels = resp.json()["labels"]
            except (ValueError, KeyError, TypeError) as exc:
                failure = f"malformed response body: {exc}"
                continue
            if not isinstance(labels, list) or len(labels) != rows.shape[0]:
                failure = "label count does not match batch size"
                continue
            return [int(v) for v in labels]
        raise TransportError(
            f"predict failed after {self.retries} attempts ({failure})"
        )


class CachedOracle(Oracle):
    """Write-through in-memory label cache around another oracle.

    Keys are 64-bit hashes of canonical float64 row bytes, so repeated scans
    of the same model reuse answers and flaky backends replay
    deterministically. Safe for concurrent use.
    """

    def __init__(self, inner: Oracle):
        self.inner = inner
        self.n_classes = inner.n_classes
        self.input_dim = inner.input_dim
        self._cache: dict[int, int] = {}
        self._lock = threading.Lock()

    def _predict(self, x):
        rows = np.ascontiguousarray(x, dtype=np.float64)
        keys = [content_hash64(row.tobytes()) for row in rows]
        out = np.empty(len(rows), dtype=np.int64)
        with self._lock:
            missing = [i for i, k in enumerate(keys) if k not in self._cache]
            for i, k in enumerate(keys):
                if k in self._cache:
                    out[i] = self._cache[k]
        if missing:
            fresh = self.inner.predict_batch(rows[missing])
            with self._lock:
                for i, lab in zip(missing, fresh):
                    self._cache[keys[i]] = int(lab)
                    out[i] = int(lab)
        return out


class SerializedOracle(Oracle):
    """Serializing adapter for backends that cannot take concurrent calls."""

    def __init__(self, inner: Oracle):
        self.inner = inner
        self.n_classes = inner.n_classes
        self.input_dim = inner.input_dim
        self._lock = threading.Lock()

    def _predict(self, x):
        with self._lock:
            return self.inner.predict_batch(x)


def _require(config: Mapping, key: str):
    if key not in config:
        raise ConfigError(f"oracle config missing required key '{key}'")
    return config[key]


def load_oracle(config: Mapping) -> Oracle:
    """Build an oracle from a config mapping.

    Kinds: ``synthetic-clean`` (seed, n_classes, d), ``synthetic-backdoor``
    (seed, n_classes, d, target, strength), ``tabulated`` (path, optional
    n_classes), ``remote`` (url, n_classes, d, optional batch/timeout/
    retries). Remote endpoints are probed once and come back wrapped in the
    cache and the serializing adapter.
    """
    if not isinstance(config, Mapping):
        raise ConfigError(f"oracle config must be a mapping, got {type(config)!r}")
    kind = _require(config, "kind")
    if kind == "synthetic-clean":
        from . import synthlab

        return synthlab.gen_clean_oracle(
            int(_require(config, "seed")),
            int(_require(config, "n_classes")),
            int(_require(config, "d")),
        )
    if kind == "synthetic-backdoor":
        from . import synthlab

        return synthlab.gen_backdoor_oracle(
            int(_require(config, "seed")),
            int(_require(config, "n_classes")),
            int(_require(config, "d")),
            int(_require(config, "target")),
            float(_require(config, "strength")),
        )
    if kind == "tabulated":
        n_classes = config.get("n_classes")
        return TabulatedOracle.from_mxt(
            _require(config, "path"),
            int(n_classes) if n_classes is not None else None,
        )
    if kind == "remote":
        remote = RemoteOracle(
            str(_require(config, "url")),
            int(_require(config, "n_classes")),
            int(_require(config, "d")),
            batch=int(config.get("batch", 256)),
            timeout=float(config.get("timeout", 10.0)),
            retries=int(config.get("retries", 3)),
        )
        remote.check_reachable()
        return SerializedOracle(CachedOracle(remote))
    raise ConfigError(f"unknown oracle kind '{kind}'")
