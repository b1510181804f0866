"""Scan orchestration and verdicts.

A scan draws N sample triplets from a clean pool, maps the oracle's
boundary over each triplet plane, averages the two area metrics, and turns
them into verdicts: a model is flagged as backdoored when its mean metric
falls at or below the threshold gamma (low entropy or low anchor-owned
area means some label has swallowed the plane). The module also calibrates
gamma from labeled score sets, ranks model populations by AUROC, and
identifies the attack target from the mean label distribution.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .boundary import BoundaryMap, plot_boundary
from .errors import (
    ConfigError,
    EmptyInput,
    InsufficientSamples,
    ManifestError,
    SingleClassInput,
)
from .geometry import SampleTriplet
from .metrics import AggregateMetrics, aggregate, plot_metrics
from .mxt import load_pool
from .oracle import Oracle, load_oracle
from .rng import Stream, derive_seed
from .synthlab import SamplePool, default_pool_seed, gen_pool

BACKDOORED = "backdoored"
CLEAN = "clean"


@dataclass(frozen=True)
class ScanParams:
    """Scan hyperparameters; the defaults are the standard operating point."""

    n_plots: int = 20
    density: int = 100
    eta: float = 5.0
    alpha: float = 10.0
    t: float = 0.5
    seed: int = 0
    distinct_labels: bool = True
    clamp: tuple[float, float] | None = None


@dataclass(frozen=True)
class CalibrationResult:
    """F1-maximizing threshold over a labeled score set."""

    gamma_bar: float
    f1_at_gamma: float
    n_candidates: int
    resamples: int
    sweep: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of one scan; serializes canonically for diffing."""

    model_id: str
    params: ScanParams
    aggregate: AggregateMetrics
    threshold_re: float | None
    threshold_ats: float | None
    verdict_re: str | None
    verdict_ats: str | None
    target_label: int | None
    target_dominance: float | None

    def to_dict(self) -> dict:
        params = asdict(self.params)
        if params["clamp"] is not None:
            params["clamp"] = list(params["clamp"])
        return {
            "model_id": self.model_id,
            "params": params,
            "mean_re": self.aggregate.mean_re,
            "mean_ats": self.aggregate.mean_ats,
            "mean_distribution": self.aggregate.mean_distribution,
            "threshold_re": self.threshold_re,
            "threshold_ats": self.threshold_ats,
            "verdict_re": self.verdict_re,
            "verdict_ats": self.verdict_ats,
            "target_label": self.target_label,
            "target_dominance": self.target_dominance,
            "per_plot": [
                {
                    "plot": k,
                    "re": m.re,
                    "ats": m.ats,
                    "anchor_labels": list(m.anchor_labels),
                    "distribution": m.distribution,
                }
                for k, m in enumerate(self.aggregate.per_plot)
            ],
        }


def verdict(mean_value: float, gamma: float) -> str:
    """Threshold rule: backdoored iff the mean metric is <= gamma."""
    return BACKDOORED if mean_value <= gamma else CLEAN


def sample_triplets(
    labels, n_plots: int, seed: int, distinct_labels: bool = True
) -> list[tuple[int, int, int]]:
    """Seeded triplet draws: uniform without replacement from the pool.

    With distinct_labels on (the default), the three picks must carry three
    different predicted classes; each plot walks a fresh seeded permutation
    and keeps the first qualifying samples.

    Raises
    ------
    InsufficientSamples
        Fewer than 3 samples, or fewer than 3 distinct predicted classes
        while distinct_labels is on.
    """
    labels = np.asarray(labels, dtype=np.int64)
    count = len(labels)
    if count < 3:
        raise InsufficientSamples(f"pool has {count} samples, need 3")
    if distinct_labels and len(np.unique(labels)) < 3:
        raise InsufficientSamples(
            "pool spans fewer than 3 distinct predicted classes"
        )
    stream = Stream(seed)
    out = []
    for _ in range(n_plots):
        picked: list[int] = []
        seen: set[int] = set()
        for idx in stream.permutation(count):
            lab = int(labels[idx])
            if distinct_labels and lab in seen:
                continue
            picked.append(int(idx))
            seen.add(lab)
            if len(picked) == 3:
                break
        out.append((picked[0], picked[1], picked[2]))
    return out


def identify_target(
    mean_dist, dominance_ratio: float = 2.0, floor: float = 0.4
) -> int | None:
    """Attack-target candidate from the mean label distribution.

    Returns the argmax class when its mean fraction reaches ``floor`` and
    exceeds the runner-up by ``dominance_ratio``; otherwise None (clean
    model, or no single dominant target).
    """
    if dominance_ratio <= 1.0:
        raise ValueError(f"dominance_ratio must be > 1, got {dominance_ratio}")
    if not 0.0 < floor < 1.0:
        raise ValueError(f"floor must be in (0, 1), got {floor}")
    p = np.asarray(mean_dist, dtype=np.float64)
    top = int(np.argmax(p))
    p_max = float(p[top])
    rest = np.delete(p, top)
    p_second = float(rest.max()) if rest.size else 0.0
    if p_max >= floor and p_max >= dominance_ratio * p_second:
        return top
    return None


def _as_pool(pool) -> SamplePool:
    if isinstance(pool, SamplePool):
        return pool
    samples, labels = pool
    return SamplePool(
        samples=np.asarray(samples, dtype=np.float64),
        labels=np.asarray(labels, dtype=np.int64),
    )


def scan(
    oracle: Oracle,
    pool,
    params: ScanParams = ScanParams(),
    threshold_re: float | None = None,
    threshold_ats: float | None = None,
    model_id: str = "model",
    jobs: int = 1,
    map_sink=None,
) -> DetectionReport:
    """Run one N-plot scan and build the detection report.

    ``pool`` is a SamplePool or a (samples, labels) pair; triplet sampling
    uses the oracle's own predictions on the pool, not the stored labels.
    Verdict fields stay None when the matching threshold is None.
    ``map_sink(k, boundary_map)``, when given, receives every map in plot
    order (rendering hook). With jobs > 1, plots are computed from a thread
    pool; metrics are still aggregated in plot order, so reports do not
    depend on scheduling.
    """
    pool = _as_pool(pool)
    predicted = oracle.predict_batch(pool.samples)
    triplet_indexes = sample_triplets(
        predicted, params.n_plots, params.seed, params.distinct_labels
    )

    def one_plot(k: int) -> BoundaryMap:
        i, j, l = triplet_indexes[k]
        triplet = SampleTriplet(
            pool.samples[i],
            pool.samples[j],
            pool.samples[l],
            labels=(int(predicted[i]), int(predicted[j]), int(predicted[l])),
        )
        return plot_boundary(
            oracle,
            triplet,
            params.eta,
            params.density,
            clamp=params.clamp,
            triplet_id=k,
            seed=params.seed,
        )

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as tp:
            maps = list(tp.map(one_plot, range(params.n_plots)))
    else:
        maps = [one_plot(k) for k in range(params.n_plots)]

    per_plot = []
    for k, bmap in enumerate(maps):
        if map_sink is not None:
            map_sink(k, bmap)
        per_plot.append(plot_metrics(bmap, params.alpha, params.t))
    agg = aggregate(per_plot)

    target = identify_target(agg.mean_distribution)
    dominance = None
    if target is not None:
        p = agg.mean_distribution
        rest = np.delete(p, target)
        second = float(rest.max()) if rest.size else 0.0
        dominance = float(p[target] / second) if second > 0 else float("inf")

    return DetectionReport(
        model_id=model_id,
        params=params,
        aggregate=agg,
        threshold_re=threshold_re,
        threshold_ats=threshold_ats,
        verdict_re=None if threshold_re is None else verdict(agg.mean_re, threshold_re),
        verdict_ats=None
        if threshold_ats is None
        else verdict(agg.mean_ats, threshold_ats),
        target_label=target,
        target_dominance=dominance,
    )


def _f1(scores: np.ndarray, is_backdoor: np.ndarray, gamma: float) -> float:
    pred = scores <= gamma
    tp = int(np.sum(pred & is_backdoor))
    fp = int(np.sum(pred & ~is_backdoor))
    fn = int(np.sum(~pred & is_backdoor))
    if tp == 0:
        return 0.0
    # single-division form: exact given integer counts
    return 2.0 * tp / (2 * tp + fp + fn)


def _candidates(scores: np.ndarray) -> np.ndarray:
    """Midpoints between consecutive distinct scores, plus two sentinels.

    The low sentinel classifies nothing as backdoored and the high sentinel
    everything; both sit one midpoint step outside the observed range so
    the returned threshold is always finite.
    """
    distinct = np.unique(scores)
    if len(distinct) == 1:
        step = 0.5
        return np.array([distinct[0] - step, distinct[0] + step])
    mids = (distinct[:-1] + distinct[1:]) / 2.0
    lo = distinct[0] - (distinct[1] - distinct[0]) / 2.0
    hi = distinct[-1] + (distinct[-1] - distinct[-2]) / 2.0
    return np.concatenate([[lo], mids, [hi]])


def _best_gamma(scores: np.ndarray, is_backdoor: np.ndarray) -> tuple[float, float, np.ndarray, np.ndarray]:
    gammas = _candidates(scores)
    f1s = np.array([_f1(scores, is_backdoor, g) for g in gammas])
    best = 0
    for i in range(len(gammas)):
        # >= so ties resolve toward the larger gamma (higher backdoor recall)
        if f1s[i] >= f1s[best]:
            best = i
    return float(gammas[best]), float(f1s[best]), gammas, f1s


def calibrate_threshold(
    scores, is_backdoor, resamples: int = 1, seed: int = 0
) -> CalibrationResult:
    """F1-maximizing threshold for the rule "backdoored iff score <= gamma".

    Candidates are the midpoints between consecutive distinct scores plus
    sentinels just outside the observed range; ties go to the larger gamma.
    With resamples > 1 the sweep runs on that many seeded bootstrap
    resamples and gamma_bar is their mean (resamples that lose one of the
    classes are skipped); the reported F1 is always measured on the full
    set at the final gamma_bar.

    Raises
    ------
    EmptyInput
        If the score list is empty.
    SingleClassInput
        If all labels are equal.
    """
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(is_backdoor, dtype=bool)
    if s.size == 0:
        raise EmptyInput("no scores to calibrate on")
    if s.shape != y.shape:
        raise ValueError("scores and flags differ in length")
    if bool(y.all()) or not bool(y.any()):
        raise SingleClassInput("calibration needs both clean and backdoored scores")

    gamma, _, gammas, f1s = _best_gamma(s, y)
    if resamples > 1:
        picks = []
        for r in range(resamples):
            stream = Stream(derive_seed(seed, r))
            idx = np.minimum(
                (stream.unit(s.size) * s.size).astype(np.int64), s.size - 1
            )
            ys = y[idx]
            if bool(ys.all()) or not bool(ys.any()):
                continue
            picks.append(_best_gamma(s[idx], ys)[0])
        if picks:
            gamma = float(np.mean(picks))
    return CalibrationResult(
        gamma_bar=float(gamma),
        f1_at_gamma=_f1(s, y, gamma),
        n_candidates=len(gammas),
        resamples=int(resamples),
        sweep=tuple((float(g), float(f)) for g, f in zip(gammas, f1s)),
    )


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def auroc(clean_scores, backdoor_scores) -> float:
    """Probability a random backdoored model outranks a random clean one.

    Suspicion is the negated metric (lower metric = more suspicious); ties
    count half. Rank formulation of the pairwise-comparison statistic.

    Raises
    ------
    EmptyInput
        If either score list is empty.
    """
    c = np.asarray(clean_scores, dtype=np.float64)
    b = np.asarray(backdoor_scores, dtype=np.float64)
    if c.size == 0 or b.size == 0:
        raise EmptyInput("auroc needs scores for both populations")
    pooled = np.concatenate([-b, -c])
    ranks = _midranks(pooled)
    rank_sum = float(np.sum(ranks[: b.size]))
    u = rank_sum - b.size * (b.size + 1) / 2.0
    return u / (b.size * c.size)


def _entry_pool(entry: dict, oracle: Oracle) -> SamplePool:
    if "pool" in entry:
        samples, labels = load_pool(entry["pool"])
        return SamplePool(samples=samples, labels=labels)
    model = getattr(oracle, "model", None)
    if model is None:
        raise ConfigError(
            f"manifest entry '{entry.get('id')}' has no pool and no synthetic model"
        )
    return gen_pool(model, seed=default_pool_seed(int(entry["oracle"]["seed"])))


def evaluate_zoo(
    manifest,
    params: ScanParams = ScanParams(),
    threshold_re: float | None = None,
    threshold_ats: float | None = None,
    jobs: int = 1,
) -> dict:
    """Scan every manifest entry and rank the populations.

    Entries are mappings with keys id, oracle (an oracle config),
    ground_truth ("clean" or "backdoored"), optional target_label, and an
    optional pool path; entries without a pool must be synthetic and get
    their default pool regenerated from the oracle seed. Each entry is
    scanned with a child seed derived from params.seed and its position, so
    the evaluation is deterministic for a fixed manifest order.

    Returns a JSON-ready table: per-model rows, AUROC for both metrics, and
    target-identification accuracy over backdoored entries that declare a
    target.

    Raises
    ------
    ManifestError
        If either ground-truth class is absent.
    """
    entries = list(manifest)
    truths = {e.get("ground_truth") for e in entries}
    if CLEAN not in truths or BACKDOORED not in truths:
        raise ManifestError("manifest must list both clean and backdoored models")

    rows = []
    re_scores: dict[str, list[float]] = {CLEAN: [], BACKDOORED: []}
    ats_scores: dict[str, list[float]] = {CLEAN: [], BACKDOORED: []}
    id_total = 0
    id_hits = 0
    for i, entry in enumerate(entries):
        oracle = load_oracle(entry["oracle"])
        pool = _entry_pool(entry, oracle)
        report = scan(
            oracle,
            pool,
            replace(params, seed=derive_seed(params.seed, i)),
            threshold_re,
            threshold_ats,
            model_id=str(entry["id"]),
            jobs=jobs,
        )
        truth = entry["ground_truth"]
        re_scores[truth].append(report.aggregate.mean_re)
        ats_scores[truth].append(report.aggregate.mean_ats)
        true_target = entry.get("target_label")
        if truth == BACKDOORED and true_target is not None:
            id_total += 1
            if report.target_label == int(true_target):
                id_hits += 1
        rows.append(
            {
                "id": str(entry["id"]),
                "ground_truth": truth,
                "mean_re": report.aggregate.mean_re,
                "mean_ats": report.aggregate.mean_ats,
                "verdict_re": report.verdict_re,
                "verdict_ats": report.verdict_ats,
                "target_label": report.target_label,
                "true_target": None if true_target is None else int(true_target),
            }
        )
    return {
        "models": rows,
        "auroc_re": auroc(re_scores[CLEAN], re_scores[BACKDOORED]),
        "auroc_ats": auroc(ats_scores[CLEAN], ats_scores[BACKDOORED]),
        "target_id_accuracy": (id_hits / id_total) if id_total else None,
        "n_clean": len(re_scores[CLEAN]),
        "n_backdoored": len(re_scores[BACKDOORED]),
    }
