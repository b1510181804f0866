"""Boundary-map assembly and PNG rendering."""
import io

import numpy as np
import pytest
from conftest import RuleOracle, constant_oracle, mk_bmap
from PIL import Image

from boundaryscan.boundary import (
    MARKER_COLOR,
    default_palette,
    label_distribution,
    plot_boundary,
    plot_filename,
    render_image,
)
from boundaryscan.errors import ConfigError, PaletteTooSmall
from boundaryscan.geometry import SampleTriplet
from boundaryscan.rng import Stream
from boundaryscan.synthlab import gen_backdoor_oracle, gen_pool


def identity_plane_triplet():
    # e1, e2 equal the input axes, so plane coords == input coords
    return SampleTriplet([0.0, 0.0], [1.0, 0.0], [0.0, 1.0])


def test_half_plane_split():
    oracle = RuleOracle(lambda x: (x[:, 1] > 0).astype(int), 2, 2)
    bmap = plot_boundary(oracle, identity_plane_triplet(), eta=1.0, density=5)
    # bounds are [0,1]^2; rows run y = 1, .75, .5, .25, 0
    assert bmap.labels.shape == (5, 5)
    assert np.all(bmap.labels[:4] == 1)
    assert np.all(bmap.labels[4] == 0)
    assert bmap.anchor_labels == (0, 0, 1)


def test_vertical_split_via_first_coordinate():
    oracle = RuleOracle(lambda x: (x[:, 0] > 0.5).astype(int), 2, 2)
    bmap = plot_boundary(oracle, identity_plane_triplet(), eta=1.0, density=4)
    # columns x = 0, 1/3, 2/3, 1: exactly the last two are above 0.5
    assert np.all(bmap.labels[:, :2] == 0)
    assert np.all(bmap.labels[:, 2:] == 1)


def test_constant_oracle_and_distribution():
    oracle = constant_oracle(0, 2, 3)
    bmap = plot_boundary(oracle, identity_plane_triplet(), eta=2.0, density=10)
    assert np.all(bmap.labels == 0)
    p = label_distribution(bmap)
    assert p.tolist() == [1.0, 0.0, 0.0]


def test_distribution_counting():
    labels = np.zeros((100, 100), dtype=np.int64)
    labels[:10] = 1  # 1000 cells
    bmap = mk_bmap(labels, (0, 0, 1), 3)
    p = label_distribution(bmap)
    assert p[0] == 0.9
    assert p[1] == 0.1
    assert p.sum() == pytest.approx(1.0, abs=1e-9)


def test_distribution_always_normalized():
    stream = Stream(31)
    for _ in range(20):
        labels = (stream.u64(36) % 5).astype(np.int64).reshape(6, 6)
        p = label_distribution(mk_bmap(labels, (0, 1, 2), 5))
        assert p.sum() == pytest.approx(1.0, abs=1e-9)
        assert p.min() >= 0


def test_label_permutation_equivariance():
    base = RuleOracle(lambda x: (x[:, 0] > 0.5).astype(int), 2, 2)
    swapped = RuleOracle(lambda x: 1 - (x[:, 0] > 0.5).astype(int), 2, 2)
    t = identity_plane_triplet()
    p1 = label_distribution(plot_boundary(base, t, 1.0, 8))
    p2 = label_distribution(plot_boundary(swapped, t, 1.0, 8))
    assert p1.tolist() == p2[::-1].tolist()


def test_out_of_range_labels_rejected():
    oracle = constant_oracle(7, 2, 3)
    with pytest.raises(ConfigError):
        plot_boundary(oracle, identity_plane_triplet(), 1.0, 4)


def test_batch_split_invariance():
    bd = gen_backdoor_oracle(21, 6, 32, target=2, strength=0.8)
    pool = gen_pool(bd.model, seed=5)
    t = SampleTriplet(pool.samples[0], pool.samples[3], pool.samples[7])
    a = plot_boundary(bd, t, 5.0, 30, batch=4096)
    b = plot_boundary(bd, t, 5.0, 30, batch=7)
    assert np.array_equal(a.labels, b.labels)


def test_jobs_do_not_change_the_map():
    bd = gen_backdoor_oracle(22, 6, 32, target=1, strength=0.8)
    pool = gen_pool(bd.model, seed=5)
    t = SampleTriplet(pool.samples[1], pool.samples[4], pool.samples[9])
    a = plot_boundary(bd, t, 5.0, 25, batch=64, jobs=1)
    b = plot_boundary(bd, t, 5.0, 25, batch=64, jobs=4)
    assert np.array_equal(a.labels, b.labels)


def test_clamp_reaches_the_oracle():
    # anchors are predicted on the raw samples; only grid probes are clamped
    seen = {}

    def spy(x):
        if len(x) != 3:
            seen["lo"] = min(seen.get("lo", np.inf), float(x.min()))
            seen["hi"] = max(seen.get("hi", -np.inf), float(x.max()))
        return np.zeros(len(x), dtype=np.int64)

    oracle = RuleOracle(spy, 2, 1)
    plot_boundary(oracle, identity_plane_triplet(), 5.0, 10, clamp=(-0.25, 0.25))
    assert seen["lo"] >= -0.25
    assert seen["hi"] <= 0.25


def test_default_palette_cycles_with_brightness_shift():
    pal = default_palette(25)
    assert len(pal) == 25
    assert len(set(pal)) == 25
    assert pal[20] != pal[0]
    # wrapped colors are dimmed copies of the base cycle
    assert all(c <= b for c, b in zip(pal[20], pal[0]))
    assert MARKER_COLOR not in pal


def test_render_pixels_match_palette():
    labels = np.array([[0, 0, 1], [2, 1, 0], [1, 1, 2]])
    # anchors pushed to a corner so they do not cover the probed pixels
    bmap = mk_bmap(labels, (0, 1, 2), 3, anchor_coords=[[3, 0], [3, 0], [3, 0]])
    pal = [(10, 20, 30), (40, 50, 60), (70, 80, 90)]
    img = Image.open(io.BytesIO(render_image(bmap, pal)))
    assert img.size == (3, 3)
    assert img.mode == "RGB"
    px = img.load()
    assert px[0, 0] == pal[0]
    assert px[2, 0] == pal[1]
    assert px[0, 1] == pal[2]


def test_render_marks_anchors_last():
    oracle = constant_oracle(0, 2, 1)
    bmap = plot_boundary(oracle, identity_plane_triplet(), 1.0, 21)
    img = Image.open(io.BytesIO(render_image(bmap)))
    arr = np.asarray(img)
    white = np.all(arr == MARKER_COLOR, axis=2)
    # three 3x3 markers; corners clip to 2x2
    assert 3 * 4 <= white.sum() <= 3 * 9
    # anchor (0, 0) sits at the bottom-left corner of the plot
    assert white[20, 0]


def test_render_determinism_and_upscale():
    labels = (Stream(8).u64(64) % 4).astype(np.int64).reshape(8, 8)
    bmap = mk_bmap(labels, (0, 1, 2), 4)
    a = render_image(bmap)
    b = render_image(bmap)
    assert a == b
    big = Image.open(io.BytesIO(render_image(bmap, upscale=3)))
    assert big.size == (24, 24)


def test_render_palette_too_small():
    bmap = mk_bmap(np.zeros((4, 4), dtype=np.int64), (0, 0, 0), 5)
    with pytest.raises(PaletteTooSmall):
        render_image(bmap, [(0, 0, 0)] * 4)


def test_png_is_8bit_rgb():
    bmap = mk_bmap(np.zeros((4, 4), dtype=np.int64), (0, 0, 0), 1)
    img = Image.open(io.BytesIO(render_image(bmap)))
    assert img.mode == "RGB"


def test_plot_filename_pattern():
    assert plot_filename("m1", 0) == "m1/plot_000.png"
    assert plot_filename("backdoor_007", 19) == "backdoor_007/plot_019.png"
