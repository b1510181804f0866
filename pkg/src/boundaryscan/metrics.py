"""Area-distribution metrics for boundary maps.

Two summaries of one label map, both low when a single label swallows the
plane: the order-alpha entropy of the per-class area distribution, and the
total area still owned by the triplet's own labels (ATS). Per-plot values
are averaged over the N plots of a scan.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .boundary import BoundaryMap, label_distribution
from .errors import EmptyInput, InconsistentParams, InvalidAlpha, InvalidT


@dataclass(frozen=True)
class PlotMetrics:
    """Metrics of a single boundary map."""

    re: float
    ats: float
    alpha: float
    t: float
    distribution: np.ndarray
    anchor_labels: tuple[int, ...]


@dataclass(frozen=True)
class AggregateMetrics:
    """Arithmetic means over the plots of one scan, in plot order."""

    mean_re: float
    mean_ats: float
    mean_distribution: np.ndarray
    per_plot: tuple[PlotMetrics, ...]


def renyi_entropy(dist, alpha: float = 10.0) -> float:
    """Order-alpha entropy of a label-area distribution, in nats.

    Parameters
    ----------
    dist : array-like
        Normalized area fractions; zero entries contribute nothing.
    alpha : float
        Entropy order, >= 1. alpha = 1 is the Shannon limit
        -sum p ln p; larger alpha weights the dominant label harder.

    Returns
    -------
    float
        ln(sum p**alpha) / (1 - alpha) for alpha > 1, in [0, ln n].

    Raises
    ------
    InvalidAlpha
        If alpha < 1.
    """
    if alpha < 1.0:
        raise InvalidAlpha(f"alpha must be >= 1, got {alpha}")
    p = np.asarray(dist, dtype=np.float64)
    p = p[p > 0.0]
    if alpha == 1.0:
        return float(-np.sum(p * np.log(p)))
    return float(np.log(np.sum(p**alpha)) / (1.0 - alpha))


def ats(bmap: BoundaryMap, dist=None, t: float = 0.5) -> float:
    """Area fraction owned by the triplet's own labels.

    Sums p_m over the distinct anchor labels in ascending label order,
    counting a label only while its fraction stays strictly below ``t``: a
    label at or above t has stopped being a "clean" region (it has taken
    over the plane), so it is excluded.

    Raises
    ------
    InvalidT
        If t is outside (0, 1].
    """
    if not 0.0 < t <= 1.0:
        raise InvalidT(f"t must be in (0, 1], got {t}")
    p = label_distribution(bmap) if dist is None else np.asarray(dist, dtype=np.float64)
    total = 0.0
    for m in sorted(set(bmap.anchor_labels)):
        if p[m] < t:
            total += float(p[m])
    return total


def plot_metrics(bmap: BoundaryMap, alpha: float = 10.0, t: float = 0.5) -> PlotMetrics:
    """Both metrics of one map, computed from a single distribution pass."""
    dist = label_distribution(bmap)
    return PlotMetrics(
        re=renyi_entropy(dist, alpha),
        ats=ats(bmap, dist, t),
        alpha=float(alpha),
        t=float(t),
        distribution=dist,
        anchor_labels=tuple(bmap.anchor_labels),
    )


def aggregate(per_plot) -> AggregateMetrics:
    """Mean metrics over a scan's plots, in plot-index order.

    Raises
    ------
    EmptyInput
        If the plot list is empty.
    InconsistentParams
        If plots disagree on alpha, t, or class count.
    """
    plots = tuple(per_plot)
    if not plots:
        raise EmptyInput("no per-plot metrics to aggregate")
    first = plots[0]
    for m in plots[1:]:
        if m.alpha != first.alpha or m.t != first.t:
            raise InconsistentParams("plots disagree on alpha or t")
        if len(m.distribution) != len(first.distribution):
            raise InconsistentParams("plots disagree on class count")
    return AggregateMetrics(
        mean_re=float(np.mean([m.re for m in plots])),
        mean_ats=float(np.mean([m.ats for m in plots])),
        mean_distribution=np.mean(np.stack([m.distribution for m in plots]), axis=0),
        per_plot=plots,
    )
