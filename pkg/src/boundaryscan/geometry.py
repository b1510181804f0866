"""Plane geometry for boundary scans.

A scan probes a classifier on the 2D plane through three input samples.
This module builds the orthonormal frame of that plane (Gram-Schmidt), the
plot bounds around the three anchors, the probe lattice over the bounds,
and the embedding from plane coordinates back into input space.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateTriplet, InvalidDensity, InvalidEta, ShapeMismatch

# relative scale below which the triplet is treated as collinear/duplicated
EPS_DEGENERATE = 1e-7
# floor (relative to |x2 - x1|) for a bounds axis with zero anchor extent
EPS_AXIS = 1e-6


@dataclass(frozen=True)
class SampleTriplet:
    """Three input vectors anchoring one plane.

    ``labels``, when present, are the oracle's predictions on the raw
    samples; geometry itself never looks at them.
    """

    x1: np.ndarray
    x2: np.ndarray
    x3: np.ndarray
    labels: tuple[int, int, int] | None = None

    def __post_init__(self):
        for name in ("x1", "x2", "x3"):
            v = np.asarray(getattr(self, name), dtype=np.float64).reshape(-1)
            object.__setattr__(self, name, v)
        if not (self.x1.shape == self.x2.shape == self.x3.shape):
            raise ShapeMismatch("triplet samples differ in dimension")
        if self.x1.size < 2:
            raise ShapeMismatch("triplet samples need dimension >= 2")


@dataclass(frozen=True)
class PlaneBasis:
    """Orthonormal frame (e1, e2) of a triplet plane.

    ``anchor_coords`` holds the plane coordinates of x1, x2, x3; row 0 is
    exactly (0, 0) and row 1 lies on the positive x axis.
    """

    origin: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    anchor_coords: np.ndarray

    @property
    def v1_norm(self) -> float:
        """|x2 - x1|, the natural length scale of the plane."""
        return float(self.anchor_coords[1, 0])


@dataclass(frozen=True)
class PlotBounds:
    """Axis-aligned plot window in plane coordinates."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    eta: float


@dataclass(frozen=True)
class ProbeGrid:
    """S*S plane coordinates in raster order.

    Rows run from y_max down to y_min, columns from x_min to x_max, so the
    coordinate list maps one-to-one onto image pixels, top row first.
    """

    coords: np.ndarray
    density: int


def span_plane(triplet: SampleTriplet) -> PlaneBasis:
    """Orthonormalize the plane through a sample triplet.

    Parameters
    ----------
    triplet : SampleTriplet
        The three anchor samples. x2 - x1 and x3 - x1 must be linearly
        independent at working precision.

    Returns
    -------
    PlaneBasis
        Frame with e1 = v1/|v1|, e2 the normalized rejection of v2 from e1,
        and anchor coordinates (0,0), (|v1|,0), (<v2,e1>, <v2,e2>).

    Raises
    ------
    DegenerateTriplet
        If |v1| <= EPS_DEGENERATE or the rejection of v2 has norm below
        EPS_DEGENERATE * |v2| (duplicated or collinear samples).
    """
    v1 = triplet.x2 - triplet.x1
    v2 = triplet.x3 - triplet.x1
    n1 = float(np.linalg.norm(v1))
    n2 = float(np.linalg.norm(v2))
    if n1 <= EPS_DEGENERATE:
        raise DegenerateTriplet("x1 and x2 coincide")
    e1 = v1 / n1
    proj = float(v2 @ e1)
    beta2 = v2 - proj * e1
    nb = float(np.linalg.norm(beta2))
    if nb <= EPS_DEGENERATE * n2:
        raise DegenerateTriplet("triplet samples are collinear")
    e2 = beta2 / nb
    anchors = np.array([[0.0, 0.0], [n1, 0.0], [proj, float(v2 @ e2)]])
    return PlaneBasis(origin=triplet.x1, e1=e1, e2=e2, anchor_coords=anchors)


def make_bounds(basis: PlaneBasis, eta: float = 5.0) -> PlotBounds:
    """Expand the anchor bounding box by a factor eta about its center.

    Per axis, with c the midpoint and h the half-extent of the three anchor
    coordinates, the bounds are [c - eta*h, c + eta*h]. A zero-extent axis
    is floored at EPS_AXIS * |v1| so the window never collapses. eta = 1
    brackets the anchors exactly.

    Raises
    ------
    InvalidEta
        If eta < 1.
    """
    if eta < 1.0:
        raise InvalidEta(f"eta must be >= 1, got {eta}")
    a = basis.anchor_coords
    lo = a.min(axis=0)
    hi = a.max(axis=0)
    center = (lo + hi) / 2.0
    half = np.maximum((hi - lo) / 2.0, EPS_AXIS * basis.v1_norm)
    return PlotBounds(
        x_min=float(center[0] - eta * half[0]),
        x_max=float(center[0] + eta * half[0]),
        y_min=float(center[1] - eta * half[1]),
        y_max=float(center[1] + eta * half[1]),
        eta=float(eta),
    )


def make_grid(bounds: PlotBounds, density: int = 100) -> ProbeGrid:
    """Lay an S x S lattice over the bounds, endpoints included.

    Raises
    ------
    InvalidDensity
        If density < 2.
    """
    if density < 2:
        raise InvalidDensity(f"density must be >= 2, got {density}")
    s = int(density)
    xs = np.linspace(bounds.x_min, bounds.x_max, s)
    ys = np.linspace(bounds.y_max, bounds.y_min, s)
    gx, gy = np.meshgrid(xs, ys)
    coords = np.stack([gx.ravel(), gy.ravel()], axis=1)
    return ProbeGrid(coords=coords, density=s)


def embed_points(
    basis: PlaneBasis,
    coords: np.ndarray,
    clamp: tuple[float, float] | None = None,
    dtype=np.float64,
) -> np.ndarray:
    """Map plane coordinates back to input space.

    Each row (x, y) becomes origin + x*e1 + y*e2, computed in ``dtype``.
    ``clamp``, when given, clips every output component to [lo, hi] for
    models that only accept a fixed value range.
    """
    c = np.asarray(coords, dtype=dtype)
    frame = np.stack([basis.e1, basis.e2]).astype(dtype)
    pts = c @ frame
    pts += basis.origin.astype(dtype)
    if clamp is not None:
        lo, hi = clamp
        np.clip(pts, lo, hi, out=pts)
    return pts


def embed_point(
    basis: PlaneBasis,
    coord,
    clamp: tuple[float, float] | None = None,
) -> np.ndarray:
    """Embed a single plane coordinate; see embed_points."""
    c = np.asarray(coord, dtype=np.float64).reshape(1, 2)
    return embed_points(basis, c, clamp=clamp)[0]
