"""Boundary maps: grid queries, label-area distributions, PNG rendering.

A boundary map is the S x S matrix of hard labels the oracle assigns over
one triplet plane. Rendering is deliberately bit-stable: a fixed palette,
a hand-rolled PNG encoder at a fixed compression level, and anchors drawn
last, so identical scans produce identical files.
"""
from __future__ import annotations

import struct
import zlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, PaletteTooSmall
from .geometry import (
    PlotBounds,
    SampleTriplet,
    embed_points,
    make_bounds,
    make_grid,
    span_plane,
)
from .oracle import Oracle

# marker color reserved for the three anchor samples
MARKER_COLOR = (255, 255, 255)

# tab-style 20-color base palette
_BASE_PALETTE = (
    (0x1F, 0x77, 0xB4), (0xAE, 0xC7, 0xE8), (0xFF, 0x7F, 0x0E), (0xFF, 0xBB, 0x78),
    (0x2C, 0xA0, 0x2C), (0x98, 0xDF, 0x8A), (0xD6, 0x27, 0x28), (0xFF, 0x98, 0x96),
    (0x94, 0x67, 0xBD), (0xC5, 0xB0, 0xD5), (0x8C, 0x56, 0x4B), (0xC4, 0x9C, 0x94),
    (0xE3, 0x77, 0xC2), (0xF7, 0xB6, 0xD2), (0x7F, 0x7F, 0x7F), (0xC7, 0xC7, 0xC7),
    (0xBC, 0xBD, 0x22), (0xDB, 0xDB, 0x8D), (0x17, 0xBE, 0xCF), (0x9E, 0xDA, 0xE5),
)


@dataclass(frozen=True)
class BoundaryMap:
    """Hard labels over one triplet plane, raster order (top row first)."""

    labels: np.ndarray
    bounds: PlotBounds
    anchor_coords: np.ndarray
    anchor_labels: tuple[int, int, int]
    n_classes: int
    triplet_id: int | str | None = None
    seed: int | None = None
    params: dict = field(default_factory=dict)


def plot_boundary(
    oracle: Oracle,
    triplet: SampleTriplet,
    eta: float = 5.0,
    density: int = 100,
    *,
    clamp: tuple[float, float] | None = None,
    dtype=np.float32,
    batch: int = 4096,
    jobs: int = 1,
    triplet_id: int | str | None = None,
    seed: int | None = None,
) -> BoundaryMap:
    """Query the oracle over the triplet plane and assemble the label map.

    Composes span_plane -> make_bounds -> make_grid -> embed_points ->
    predict_batch. Anchor labels are the oracle's predictions on the raw
    samples, not on their grid cells. Probe points are embedded in
    ``dtype`` (float32 by default; probes are not precision-critical) in
    fixed sub-batches of ``batch`` rows; with jobs > 1 the sub-batches are
    queried from a thread pool and assembled by position, so the result
    never depends on scheduling.
    """
    basis = span_plane(triplet)
    bounds = make_bounds(basis, eta)
    grid = make_grid(bounds, density)
    s = grid.density
    anchor_labels = oracle.predict_batch(
        np.stack([triplet.x1, triplet.x2, triplet.x3])
    )

    def work(start: int) -> tuple[int, np.ndarray]:
        pts = embed_points(
            basis, grid.coords[start : start + batch], clamp=clamp, dtype=dtype
        )
        return start, oracle.predict_batch(pts)

    flat = np.empty(s * s, dtype=np.int64)
    starts = range(0, s * s, batch)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            for start, labels in pool.map(work, starts):
                flat[start : start + len(labels)] = labels
    else:
        for start in starts:
            _, labels = work(start)
            flat[start : start + len(labels)] = labels
    if flat.min() < 0 or flat.max() >= oracle.n_classes:
        raise ConfigError("oracle produced labels outside [0, n_classes)")
    return BoundaryMap(
        labels=flat.reshape(s, s),
        bounds=bounds,
        anchor_coords=basis.anchor_coords,
        anchor_labels=tuple(int(v) for v in anchor_labels),
        n_classes=oracle.n_classes,
        triplet_id=triplet_id,
        seed=seed,
        params={"eta": float(eta), "density": int(density)},
    )


def label_distribution(bmap: BoundaryMap) -> np.ndarray:
    """Area fraction per class: cell counts over S^2. Sums to 1."""
    counts = np.bincount(bmap.labels.ravel(), minlength=bmap.n_classes)
    return counts / bmap.labels.size


def default_palette(n_classes: int) -> list[tuple[int, int, int]]:
    """Deterministic palette covering n_classes.

    The first 20 classes use the base colors; beyond that the base cycle
    repeats with progressively darkened brightness so indices remain
    distinguishable and the marker color is never produced.
    """
    out = []
    for i in range(n_classes):
        r, g, b = _BASE_PALETTE[i % len(_BASE_PALETTE)]
        f = 0.65 ** (i // len(_BASE_PALETTE))
        out.append((int(round(r * f)), int(round(g * f)), int(round(b * f))))
    return out


def _nearest_cell(bmap: BoundaryMap, coord: np.ndarray) -> tuple[int, int]:
    s = bmap.labels.shape[0]
    xs = np.linspace(bmap.bounds.x_min, bmap.bounds.x_max, s)
    ys = np.linspace(bmap.bounds.y_max, bmap.bounds.y_min, s)
    col = int(np.argmin(np.abs(xs - coord[0])))
    row = int(np.argmin(np.abs(ys - coord[1])))
    return row, col


def render_image(
    bmap: BoundaryMap,
    palette: list[tuple[int, int, int]] | None = None,
    upscale: int = 1,
) -> bytes:
    """Render a boundary map to PNG bytes (8-bit RGB, no alpha).

    One pixel per grid cell, optionally integer-upscaled. Anchors are
    overdrawn last as 3x3 markers in the reserved marker color. Identical
    maps render to byte-identical files.
    """
    if palette is None:
        palette = default_palette(bmap.n_classes)
    if len(palette) < bmap.n_classes:
        raise PaletteTooSmall(
            f"palette has {len(palette)} colors for {bmap.n_classes} classes"
        )
    if upscale < 1:
        raise ValueError(f"upscale must be >= 1, got {upscale}")
    lut = np.asarray(palette, dtype=np.uint8)
    rgb = lut[bmap.labels]
    s = bmap.labels.shape[0]
    for anchor in bmap.anchor_coords:
        row, col = _nearest_cell(bmap, anchor)
        rgb[max(row - 1, 0) : min(row + 2, s), max(col - 1, 0) : min(col + 2, s)] = (
            MARKER_COLOR
        )
    if upscale > 1:
        rgb = np.kron(rgb, np.ones((upscale, upscale, 1), dtype=np.uint8))
    return _encode_png(rgb)


def plot_filename(model_id: str, k: int) -> str:
    """Relative path of plot k for a model: {model_id}/plot_{k:03}.png"""
    return f"{model_id}/plot_{k:03d}.png"


def _encode_png(rgb: np.ndarray) -> bytes:
    """Minimal PNG writer: filter 0 scanlines, fixed zlib level."""
    h, w, _ = rgb.shape
    raw = b"".join(b"\x00" + rgb[i].tobytes() for i in range(h))

    def chunk(tag: bytes, payload: bytes) -> bytes:
        data = tag + payload
        return struct.pack(">I", len(payload)) + data + struct.pack(
            ">I", zlib.crc32(data) & 0xFFFFFFFF
        )

    header = struct.pack(">IIBBBBB", w, h, 8, 2, 0, 0, 0)
    return b"".join(
        [
            b"\x89PNG\r\n\x1a\n",
            chunk(b"IHDR", header),
            chunk(b"IDAT", zlib.compress(raw, 6)),
            chunk(b"IEND", b""),
        ]
    )
