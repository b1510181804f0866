"""Synthetic classifier lab: seeded centroid models with optional backdoors.

Real backdoored networks are expensive to train, so the test bed generates
deterministic stand-ins that show the same boundary-map behavior at desk
scale: clean models keep the plane split between the anchor labels, while
backdoored models hand most of the expanded plane to the target label and
shrink the anchor-owned regions.

Clean rule
    n centroids drawn from the seeded stream, normalized to radius r
    (default 10). A query gets the class of its nearest centroid;
    equidistant ties go to the lowest class index.

Backdoor rule
    Two shortcut conditions, OR-ed on top of the clean rule::

        label(x) = target  if  <x, w> > tau_dir  or  |x| > tau_rad
                   nearest centroid otherwise

    with w a seeded random unit direction and

        tau_dir = (1.5 - strength) * max_i <c_i, w> + 3 * sigma
        tau_rad = (2.0 - strength) * (sqrt(r^2 + d * sigma^2) + 3 * sigma)

    where sigma is the pool noise scale (default 0.1 * r). Pool samples
    concentrate on the shell of radius sqrt(r^2 + d * sigma^2) (their norm
    varies by about sigma), and project onto any fixed unit direction
    within a few sigma of the centroid projections, so both conditions stay
    silent on the pool at every strength in (0, 1]. Probe grids expanded by
    eta reach far outside that shell, so the radial condition hands the
    off-manifold bulk of the plane to the target; the directional condition
    adds the classic half-space sliver. Raising strength lowers both
    thresholds and can only grow the triggered region.

Numerics
    Scores are computed in float32 via matrix products for throughput. BLAS
    results for one row can shift by a few ULPs depending on how callers
    batch their queries, so any row whose decision is within a relative
    margin of a class tie or a trigger threshold is recomputed one row at a
    time through a fixed code path. Decisions outside the margin are stable
    under such shifts, which makes labels independent of batch splitting.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParams
from .oracle import Oracle
from .rng import Stream, derive_seed

DEFAULT_RADIUS = 10.0
POOL_SIGMA_FRACTION = 0.1
# relative margin under which a decision is recomputed row-by-row
_REL_MARGIN = 1e-4
# child-seed tag for a model's default pool ("pool" in ASCII)
_POOL_TAG = 0x706F6F6C


@dataclass(frozen=True)
class CentroidModel:
    """n centroids of radius `radius` in dimension d, plus their seed."""

    centroids: np.ndarray
    radius: float
    seed: int

    @property
    def n_classes(self) -> int:
        return self.centroids.shape[0]

    @property
    def dim(self) -> int:
        return self.centroids.shape[1]


@dataclass(frozen=True)
class BackdoorSpec:
    """Trigger parameters of a backdoored centroid oracle."""

    target_label: int
    w: np.ndarray
    tau_dir: float
    tau_rad: float
    strength: float


@dataclass(frozen=True)
class SamplePool:
    """Labeled clean samples; values are exactly float32-representable so
    in-memory pools match pools saved to and loaded from disk."""

    samples: np.ndarray
    labels: np.ndarray


class CentroidOracle(Oracle):
    """Nearest-centroid hard-label classifier."""

    def __init__(self, model: CentroidModel):
        self.model = model
        self.n_classes = model.n_classes
        self.input_dim = model.dim
        c32 = np.ascontiguousarray(model.centroids, dtype=np.float32)
        self._c32 = c32
        self._ct32 = np.ascontiguousarray(c32.T)
        # argmin |x - c|^2 == argmax <x, c> - |c|^2 / 2
        self._half_sq = 0.5 * np.einsum("ij,ij->i", c32, c32)

    def _base_labels(self, x32: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Labels plus a mask of rows too close to a class tie to trust."""
        scores = x32 @ self._ct32
        scores -= self._half_sq
        labels = np.argmax(scores, axis=1).astype(np.int64)
        part = np.partition(scores, self.n_classes - 2, axis=1)
        gap = part[:, -1] - part[:, -2]
        margin = _REL_MARGIN * (1.0 + np.abs(part[:, -1]))
        return labels, gap < margin

    def _solo_label(self, row32: np.ndarray) -> int:
        scores = row32 @ self._ct32
        scores -= self._half_sq
        return int(np.argmax(scores))

    def _predict(self, x):
        x32 = np.ascontiguousarray(x, dtype=np.float32)
        labels, unsure = self._base_labels(x32)
        for i in np.flatnonzero(unsure):
            labels[i] = self._solo_label(x32[i])
        return labels


class BackdoorOracle(CentroidOracle):
    """Centroid classifier with the two-condition shortcut overlay."""

    def __init__(self, model: CentroidModel, spec: BackdoorSpec):
        super().__init__(model)
        self.spec = spec
        self._w32 = np.ascontiguousarray(spec.w, dtype=np.float32)
        self._tau_rad_sq = spec.tau_rad**2

    def _triggered_solo(self, row32: np.ndarray) -> bool:
        proj = float(row32 @ self._w32)
        norm_sq = float(row32 @ row32)
        return proj > self.spec.tau_dir or norm_sq > self._tau_rad_sq

    def _predict(self, x):
        x32 = np.ascontiguousarray(x, dtype=np.float32)
        labels, unsure = self._base_labels(x32)
        proj = x32 @ self._w32
        norm_sq = np.einsum("ij,ij->i", x32, x32)
        triggered = (proj > self.spec.tau_dir) | (norm_sq > self._tau_rad_sq)
        out = np.where(triggered, np.int64(self.spec.target_label), labels)
        unsure |= np.abs(proj - self.spec.tau_dir) < _REL_MARGIN * (1.0 + np.abs(proj))
        unsure |= np.abs(norm_sq - self._tau_rad_sq) < _REL_MARGIN * (1.0 + norm_sq)
        for i in np.flatnonzero(unsure):
            if self._triggered_solo(x32[i]):
                out[i] = self.spec.target_label
            else:
                out[i] = self._solo_label(x32[i])
        return out


def _gen_centroids(stream: Stream, n: int, d: int, radius: float) -> np.ndarray:
    c = stream.gauss(n * d).reshape(n, d)
    norms = np.linalg.norm(c, axis=1, keepdims=True)
    return c / norms * radius


def _check_model_params(n: int, d: int) -> None:
    if n < 2:
        raise InvalidParams(f"need at least 2 classes, got {n}")
    if d < 2:
        raise InvalidParams(f"need dimension >= 2, got {d}")


def gen_clean_oracle(
    seed: int, n: int, d: int, radius: float = DEFAULT_RADIUS
) -> CentroidOracle:
    """Seeded nearest-centroid oracle with n classes in dimension d."""
    _check_model_params(n, d)
    stream = Stream(seed)
    model = CentroidModel(_gen_centroids(stream, n, d, radius), radius, int(seed))
    return CentroidOracle(model)


def gen_backdoor_oracle(
    seed: int,
    n: int,
    d: int,
    target: int,
    strength: float,
    radius: float = DEFAULT_RADIUS,
    sigma: float | None = None,
) -> BackdoorOracle:
    """Backdoored twin of gen_clean_oracle(seed, n, d).

    The same seed yields the same centroids as the clean oracle, so clean
    and backdoored models form matched pairs. ``strength`` in (0, 1] scales
    both trigger thresholds downward; ``sigma`` is the pool noise scale the
    thresholds must stay silent against (default 0.1 * radius).
    """
    _check_model_params(n, d)
    if not 0 <= target < n:
        raise InvalidParams(f"target {target} outside [0, {n})")
    if not 0.0 < strength <= 1.0:
        raise InvalidParams(f"strength must be in (0, 1], got {strength}")
    if sigma is None:
        sigma = POOL_SIGMA_FRACTION * radius
    stream = Stream(seed)
    centroids = _gen_centroids(stream, n, d, radius)
    w = stream.gauss(d)
    w = w / np.linalg.norm(w)
    tau_dir = (1.5 - strength) * float(np.max(centroids @ w)) + 3.0 * sigma
    shell = float(np.sqrt(radius**2 + d * sigma**2))
    tau_rad = (2.0 - strength) * (shell + 3.0 * sigma)
    model = CentroidModel(centroids, radius, int(seed))
    spec = BackdoorSpec(int(target), w, tau_dir, tau_rad, float(strength))
    return BackdoorOracle(model, spec)


def gen_pool(
    model: CentroidModel,
    per_class: int = 2,
    sigma: float | None = None,
    seed: int = 0,
) -> SamplePool:
    """Clean sample pool: per_class noisy copies of each centroid.

    Noise is isotropic gaussian with per-coordinate standard deviation
    ``sigma`` (default 0.1 * radius); labels come from the clean
    nearest-centroid rule. Samples are quantized through float32 so they
    round-trip through pool files unchanged.
    """
    if per_class < 1:
        raise InvalidParams(f"per_class must be >= 1, got {per_class}")
    if sigma is None:
        sigma = POOL_SIGMA_FRACTION * model.radius
    if sigma < 0:
        raise InvalidParams(f"sigma must be >= 0, got {sigma}")
    n, d = model.centroids.shape
    stream = Stream(seed)
    noise = stream.gauss(n * per_class * d).reshape(n * per_class, d)
    samples = np.repeat(model.centroids, per_class, axis=0) + sigma * noise
    samples = samples.astype(np.float32).astype(np.float64)
    labels = CentroidOracle(model).predict_batch(samples)
    return SamplePool(samples=samples, labels=labels)


def default_pool_seed(oracle_seed: int) -> int:
    """Pool seed used when a manifest entry does not ship a pool."""
    return derive_seed(oracle_seed, _POOL_TAG)


@dataclass(frozen=True)
class ZooEntry:
    """One model of a generated zoo plus its manifest metadata."""

    model_id: str
    config: dict
    ground_truth: str
    target_label: int | None
    pool_seed: int

    def to_manifest(self, pool_path: str | None = None) -> dict:
        entry = {
            "id": self.model_id,
            "oracle": dict(self.config),
            "ground_truth": self.ground_truth,
            "target_label": self.target_label,
        }
        if pool_path is not None:
            entry["pool"] = pool_path
        return entry


def gen_zoo(
    seed: int,
    n_clean: int,
    n_backdoor: int,
    n: int = 10,
    d: int = 3072,
    strength: float = 0.8,
) -> list[ZooEntry]:
    """Deterministic model zoo: n_clean clean + n_backdoor backdoored entries.

    Per-model seeds are drawn from the master stream; each backdoored model
    takes its target label from its own seed so targets vary across the zoo.
    """
    if n_clean < 0 or n_backdoor < 0 or n_clean + n_backdoor == 0:
        raise InvalidParams("zoo needs a nonnegative, nonzero model count")
    _check_model_params(n, d)
    if not 0.0 < strength <= 1.0:
        raise InvalidParams(f"strength must be in (0, 1], got {strength}")
    master = Stream(seed)
    entries = []
    for i in range(n_clean):
        s = int(master.u64(1)[0])
        config = {"kind": "synthetic-clean", "seed": s, "n_classes": n, "d": d}
        entries.append(
            ZooEntry(f"clean_{i:03d}", config, "clean", None, default_pool_seed(s))
        )
    for i in range(n_backdoor):
        s = int(master.u64(1)[0])
        target = s % n
        config = {
            "kind": "synthetic-backdoor",
            "seed": s,
            "n_classes": n,
            "d": d,
            "target": target,
            "strength": strength,
        }
        entries.append(
            ZooEntry(
                f"backdoor_{i:03d}", config, "backdoored", target, default_pool_seed(s)
            )
        )
    return entries
