import numpy as np
import pytest

from damageseg.edges import SOBEL_X
from damageseg.errors import DimensionMismatchError, ParameterError
from damageseg.raster import (
    FloatPlane,
    Raster,
    convolve2d,
    plane_from_raster,
    quantize_plane,
    require_same_shape,
    resize_bilinear,
    resize_nearest_mask,
    round_half_up,
    to_grayscale,
)

from oracles import convolve_naive


def test_round_half_up_breaks_ties_upward():
    vals = np.array([0.5, 1.5, 2.5, -0.5, -1.5, 2.4999])
    assert round_half_up(vals).tolist() == [1.0, 2.0, 3.0, 0.0, -1.0, 2.0]


def test_raster_is_immutable():
    img = Raster(np.zeros((4, 4), dtype=np.uint8))
    with pytest.raises(AttributeError):
        img.pixels = np.ones((4, 4), dtype=np.uint8)
    with pytest.raises(ValueError):
        img.pixels[0, 0] = 9


def test_raster_copies_its_input():
    src = np.zeros((3, 3), dtype=np.uint8)
    img = Raster(src)
    src[0, 0] = 200
    assert img.pixels[0, 0] == 0


def test_raster_rejects_bad_input():
    with pytest.raises(ParameterError):
        Raster(np.zeros((3, 3), dtype=np.float64))
    with pytest.raises(ParameterError):
        Raster(np.zeros((3, 3, 4), dtype=np.uint8))
    with pytest.raises(ParameterError):
        Raster(np.zeros((0, 3), dtype=np.uint8))


def test_png_round_trip_bytes(tmp_path):
    rng = np.random.default_rng(7)
    img = Raster(rng.integers(0, 256, (20, 30, 3), dtype=np.uint8))
    p1 = tmp_path / "a.png"
    p2 = tmp_path / "b.png"
    img.to_png(p1)
    again = Raster.from_png(p1)
    assert again == img
    again.to_png(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_grayscale_extremes():
    white = Raster(np.full((2, 2, 3), 255, dtype=np.uint8))
    black = Raster(np.zeros((2, 2, 3), dtype=np.uint8))
    assert np.all(to_grayscale(white).pixels == 255)
    assert np.all(to_grayscale(black).pixels == 0)


def test_grayscale_frozen_value():
    # 0.299*100 + 0.587*150 + 0.114*200 = 140.75, rounds half up
    img = Raster(np.tile(np.array([100, 150, 200], dtype=np.uint8), (2, 2, 1)))
    assert np.all(to_grayscale(img).pixels == 141)


def test_grayscale_passes_single_channel_through():
    img = Raster(np.arange(12, dtype=np.uint8).reshape(3, 4))
    assert to_grayscale(img) == img


def test_convolve_rejects_even_kernel():
    plane = FloatPlane(np.zeros((4, 4)))
    with pytest.raises(ParameterError):
        convolve2d(plane, np.ones((2, 3)))


def test_convolve_identity():
    plane = FloatPlane(np.arange(30.0).reshape(5, 6))
    out = convolve2d(plane, np.array([[1.0]]))
    assert np.array_equal(out.values, plane.values)


def test_convolve_zero_sum_kernel_on_constant_is_zero():
    plane = FloatPlane(np.full((6, 6), 37.0))
    kernel = np.asarray(SOBEL_X, dtype=np.float64)
    out = convolve2d(plane, kernel)
    assert np.all(out.values == 0.0)


def test_convolve_ramp_against_sobel():
    # horizontal ramp f(x) = x; true convolution flips the kernel, so the
    # raw interior response is -8; replicate padding halves it at the edges
    ramp = FloatPlane(np.tile(np.arange(9.0), (5, 1)))
    out = convolve2d(ramp, np.asarray(SOBEL_X, dtype=np.float64))
    assert np.all(out.values[:, 1:-1] == -8.0)
    assert np.all(out.values[:, 0] == -4.0)
    assert np.all(out.values[:, -1] == -4.0)


def test_convolve_linearity():
    rng = np.random.default_rng(11)
    f = rng.normal(0, 10, (8, 9))
    g = rng.normal(0, 10, (8, 9))
    k = rng.normal(0, 1, (3, 3))
    lhs = convolve2d(FloatPlane(2.5 * f + 1.5 * g), k).values
    rhs = 2.5 * convolve2d(FloatPlane(f), k).values + 1.5 * convolve2d(FloatPlane(g), k).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-9


def test_convolve_shift_equivariance_interior():
    rng = np.random.default_rng(12)
    f = rng.normal(0, 10, (12, 12))
    k = rng.normal(0, 1, (3, 3))
    shifted = np.roll(f, (1, 1), axis=(0, 1))
    a = convolve2d(FloatPlane(f), k).values
    b = convolve2d(FloatPlane(shifted), k).values
    # compare away from every border so replicate padding never enters
    assert np.array_equal(a[2:-2, 2:-2], b[3:-1, 3:-1])


def test_convolve_matches_naive_oracle():
    rng = np.random.default_rng(13)
    for _ in range(10):
        f = rng.normal(0, 5, (7, 7))
        k = rng.normal(0, 1, (5, 3))
        got = convolve2d(FloatPlane(f), k).values
        want = convolve_naive(f, k)
        assert np.array_equal(got, want)


def test_plane_round_trip_and_quantize_clips():
    img = Raster(np.arange(16, dtype=np.uint8).reshape(4, 4))
    plane = plane_from_raster(img)
    assert quantize_plane(plane) == img
    hot = FloatPlane(np.array([[-5.0, 99.4, 99.5, 300.0]]))
    assert quantize_plane(hot).pixels.tolist() == [[0, 99, 100, 255]]


def test_plane_from_rgb_raster_rejected():
    img = Raster(np.zeros((4, 4, 3), dtype=np.uint8))
    with pytest.raises(ParameterError):
        plane_from_raster(img)


def test_resize_bilinear_identity_and_constant():
    rng = np.random.default_rng(14)
    img = Raster(rng.integers(0, 256, (10, 12, 3), dtype=np.uint8))
    assert resize_bilinear(img, 12, 10) == img
    flat = Raster(np.full((9, 7), 88, dtype=np.uint8))
    assert np.all(resize_bilinear(flat, 20, 5).pixels == 88)


def test_resize_nearest_mask_preserves_boolness():
    mask = np.zeros((4, 4), dtype=bool)
    mask[1:3, 1:3] = True
    out = resize_nearest_mask(mask, 8, 8)
    assert out.dtype == bool and out.shape == (8, 8)
    assert np.array_equal(out[2:6, 2:6], np.ones((4, 4), dtype=bool))
    assert out.sum() == 16


def test_require_same_shape():
    require_same_shape("planes", (3, 4), (3, 4))
    with pytest.raises(DimensionMismatchError):
        require_same_shape("planes", (3, 4), (4, 3))
