import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from boundaryscan.errors import (
    DegenerateTriplet,
    InvalidDensity,
    InvalidEta,
    ShapeMismatch,
)
from boundaryscan.geometry import (
    PlaneBasis,
    SampleTriplet,
    embed_point,
    embed_points,
    make_bounds,
    make_grid,
    span_plane,
)
from boundaryscan.rng import Stream


def random_triplet(stream, d):
    x = stream.gauss(3 * d).reshape(3, d)
    return SampleTriplet(x[0], x[1], x[2])


def test_axis_aligned_case():
    basis = span_plane(SampleTriplet([0, 0, 0], [2, 0, 0], [1, 1, 0]))
    assert np.allclose(basis.e1, [1, 0, 0])
    assert np.allclose(basis.e2, [0, 1, 0])
    assert np.allclose(basis.anchor_coords, [[0, 0], [2, 0], [1, 1]])


def test_anchor_coords_structure():
    basis = span_plane(random_triplet(Stream(4), 32))
    assert basis.anchor_coords[0, 0] == 0.0
    assert basis.anchor_coords[0, 1] == 0.0
    assert abs(basis.anchor_coords[1, 1]) <= 1e-9
    assert basis.anchor_coords[1, 0] > 0
    # e2 points toward x3, so its coordinate is positive
    assert basis.anchor_coords[2, 1] > 0


def test_orthonormal_frames():
    stream = Stream(7)
    for d in (2, 32, 3072):
        for _ in range(20):
            basis = span_plane(random_triplet(stream, d))
            gram = np.array(
                [
                    [basis.e1 @ basis.e1, basis.e1 @ basis.e2],
                    [basis.e2 @ basis.e1, basis.e2 @ basis.e2],
                ]
            )
            assert np.abs(gram - np.eye(2)).max() <= 1e-9


def test_anchor_round_trip():
    stream = Stream(8)
    for d in (2, 32, 3072):
        t = random_triplet(stream, d)
        basis = span_plane(t)
        for coord, x in zip(basis.anchor_coords, (t.x1, t.x2, t.x3)):
            back = embed_point(basis, coord)
            scale = max(np.linalg.norm(x), 1.0)
            assert np.linalg.norm(back - x) / scale <= 1e-5


def test_collinear_raises():
    with pytest.raises(DegenerateTriplet):
        span_plane(SampleTriplet([0, 0], [1, 0], [0.5, 0]))


def test_duplicate_x1_x2_raises():
    with pytest.raises(DegenerateTriplet):
        span_plane(SampleTriplet([1, 2, 3], [1, 2, 3], [4, 5, 6]))


def test_duplicate_x3_raises():
    with pytest.raises(DegenerateTriplet):
        span_plane(SampleTriplet([1, 2], [3, 4], [1, 2]))


def test_nearly_collinear_raises():
    # rejection norm far below the 1e-7 relative gate
    x3 = np.array([0.5, 1e-12])
    with pytest.raises(DegenerateTriplet):
        span_plane(SampleTriplet([0.0, 0.0], [1.0, 0.0], x3))


def test_triplet_shape_validation():
    with pytest.raises(ShapeMismatch):
        SampleTriplet([1, 2], [1, 2, 3], [4, 5, 6])
    with pytest.raises(ShapeMismatch):
        SampleTriplet([1.0], [2.0], [3.0])


def test_bounds_eta_one_brackets_anchors():
    basis = span_plane(SampleTriplet([0, 0, 0], [2, 0, 0], [1, 1, 0]))
    b = make_bounds(basis, 1.0)
    assert (b.x_min, b.x_max, b.y_min, b.y_max) == (0.0, 2.0, 0.0, 1.0)


def test_bounds_eta_five_scales_about_center():
    basis = span_plane(SampleTriplet([0, 0, 0], [2, 0, 0], [1, 1, 0]))
    b = make_bounds(basis, 5.0)
    assert (b.x_min, b.x_max) == (-4.0, 6.0)
    assert (b.y_min, b.y_max) == (-2.0, 3.0)


def test_bounds_monotone_in_eta():
    basis = span_plane(random_triplet(Stream(12), 16))
    inner = make_bounds(basis, 3.0)
    outer = make_bounds(basis, 8.0)
    assert outer.x_min <= inner.x_min and outer.x_max >= inner.x_max
    assert outer.y_min <= inner.y_min and outer.y_max >= inner.y_max


def test_bounds_invalid_eta():
    basis = span_plane(SampleTriplet([0, 0], [1, 0], [0, 1]))
    with pytest.raises(InvalidEta):
        make_bounds(basis, 0.5)


def test_bounds_floor_zero_extent_axis():
    # hand-built frame with all anchors on the x axis
    basis = PlaneBasis(
        origin=np.zeros(2),
        e1=np.array([1.0, 0.0]),
        e2=np.array([0.0, 1.0]),
        anchor_coords=np.array([[0.0, 0.0], [2.0, 0.0], [1.0, 0.0]]),
    )
    b = make_bounds(basis, 5.0)
    assert b.y_max > b.y_min
    assert b.y_max - b.y_min == pytest.approx(2 * 5.0 * 1e-6 * 2.0)


def test_grid_raster_order():
    bounds = make_bounds(
        span_plane(SampleTriplet([0, 0], [2, 0], [1, 2])), 1.0
    )
    grid = make_grid(bounds, 3)
    assert grid.coords.shape == (9, 2)
    # top row first, columns left to right
    assert grid.coords[0].tolist() == [bounds.x_min, bounds.y_max]
    assert grid.coords[2].tolist() == [bounds.x_max, bounds.y_max]
    assert grid.coords[-1].tolist() == [bounds.x_max, bounds.y_min]


def test_grid_s2_is_corners():
    bounds = make_bounds(
        span_plane(SampleTriplet([0, 0], [2, 0], [1, 2])), 1.0
    )
    grid = make_grid(bounds, 2)
    corners = {
        (bounds.x_min, bounds.y_max),
        (bounds.x_max, bounds.y_max),
        (bounds.x_min, bounds.y_min),
        (bounds.x_max, bounds.y_min),
    }
    assert {tuple(c) for c in grid.coords} == corners


def test_grid_spacing():
    basis = span_plane(SampleTriplet([0, 0, 0], [2, 0, 0], [1, 1, 0]))
    grid = make_grid(make_bounds(basis, 5.0), 100)
    assert len(grid.coords) == 10_000
    dx = grid.coords[1, 0] - grid.coords[0, 0]
    dy = grid.coords[0, 1] - grid.coords[100, 1]
    assert dx == pytest.approx(10 / 99)
    assert dy == pytest.approx(5 / 99)


def test_grid_invalid_density():
    bounds = make_bounds(span_plane(SampleTriplet([0, 0], [2, 0], [1, 2])), 1.0)
    with pytest.raises(InvalidDensity):
        make_grid(bounds, 1)


def test_grid_determinism():
    bounds = make_bounds(span_plane(random_triplet(Stream(3), 8)), 5.0)
    a = make_grid(bounds, 37).coords
    b = make_grid(bounds, 37).coords
    assert a.tobytes() == b.tobytes()


def test_embed_origin_and_midpoint():
    t = SampleTriplet([0, 0, 0], [2, 0, 0], [1, 1, 0])
    basis = span_plane(t)
    assert np.array_equal(embed_point(basis, (0, 0)), t.x1)
    mid = embed_point(basis, (basis.v1_norm / 2, 0))
    assert np.allclose(mid, [1, 0, 0])


def test_embed_clamp():
    basis = span_plane(SampleTriplet([0, 0], [2, 0], [1, 2]))
    far = embed_points(basis, np.array([[100.0, 100.0]]), clamp=(-1.0, 1.0))
    assert far.min() >= -1.0
    assert far.max() <= 1.0


def test_embed_dtype():
    basis = span_plane(random_triplet(Stream(5), 64))
    pts = embed_points(basis, np.array([[1.5, -2.0]]), dtype=np.float32)
    assert pts.dtype == np.float32


@st.composite
def triplets(draw):
    d = draw(st.sampled_from([2, 3, 8]))
    vecs = draw(
        arrays(
            np.float64,
            (3, d),
            elements=st.floats(-100, 100, allow_nan=False, width=64),
        )
    )
    return SampleTriplet(vecs[0], vecs[1], vecs[2])


@settings(max_examples=200)
@given(triplets())
def test_span_plane_never_returns_a_bad_frame(triplet):
    # either a clean rejection or a frame meeting the documented tolerances
    try:
        basis = span_plane(triplet)
    except DegenerateTriplet:
        return
    assert abs(basis.e1 @ basis.e1 - 1) <= 1e-9
    assert abs(basis.e2 @ basis.e2 - 1) <= 1e-9
    assert abs(basis.e1 @ basis.e2) <= 1e-9
