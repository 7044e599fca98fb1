import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats
from skimage import color

from degradeiqa.errors import InvalidArgument
from degradeiqa.imgproc import (
    Rect,
    as_image,
    convolve2d,
    crop,
    gaussian_filter,
    gaussian_kernel1d,
    hsv_to_rgb,
    lab_to_rgb,
    luminance,
    psnr,
    random_crop,
    read_image,
    resize,
    rgb_to_hsv,
    rgb_to_lab,
    rgb_to_ycbcr,
    write_image,
    ycbcr_to_rgb,
)
from oracles import convolve_naive

unit_images = arrays(
    np.float64,
    st.tuples(st.integers(1, 6), st.integers(1, 6), st.just(3)),
    elements=st.floats(0, 1, allow_nan=False),
)


def test_as_image_rejects_bad_shapes():
    with pytest.raises(InvalidArgument):
        as_image(np.zeros((4, 4)))
    with pytest.raises(InvalidArgument):
        as_image(np.zeros((0, 4, 3)))


def test_uint8_input_is_scaled():
    a = as_image(np.full((2, 2, 3), 255, np.uint8))
    assert a.dtype == np.float32 and np.all(a == 1.0)


@settings(max_examples=50, deadline=None)
@given(unit_images)
def test_ycbcr_round_trip(img):
    assert np.allclose(ycbcr_to_rgb(rgb_to_ycbcr(img)), img, atol=1e-5)


@settings(max_examples=50, deadline=None)
@given(unit_images)
def test_hsv_round_trip(img):
    assert np.allclose(hsv_to_rgb(rgb_to_hsv(img)), img, atol=1e-5)


@settings(max_examples=50, deadline=None)
@given(unit_images)
def test_lab_round_trip(img):
    assert np.allclose(lab_to_rgb(rgb_to_lab(img)), img, atol=1e-4)


def test_lab_matches_skimage(rng):
    # the white point here is the matrix image of RGB (1,1,1), a hair off the rounded D65 tristimulus
    img = rng.random((8, 8, 3))
    ours, ref = rgb_to_lab(img), color.rgb2lab(img)
    assert np.allclose(ours[..., 0], ref[..., 0], atol=1e-6)
    assert np.allclose(ours[..., 1:], ref[..., 1:], atol=1e-2)


def test_lab_gray_has_no_chroma():
    gray = np.linspace(0, 1, 11)[:, None, None] * np.ones((1, 1, 3))
    assert np.allclose(rgb_to_lab(gray)[..., 1:], 0.0, atol=1e-9)


def test_hsv_matches_skimage(rng):
    img = rng.random((8, 8, 3))
    ours = rgb_to_hsv(img)
    ref = color.rgb2hsv(img)
    assert np.allclose(ours[..., 0] / 360.0, ref[..., 0], atol=1e-6)
    assert np.allclose(ours[..., 1:], ref[..., 1:], atol=1e-6)


def test_luminance_weights():
    img = np.zeros((1, 3, 3))
    img[0, 0, 0] = img[0, 1, 1] = img[0, 2, 2] = 1.0
    assert np.allclose(luminance(img)[0], [0.299, 0.587, 0.114])


def test_convolve_matches_naive(rng):
    img = rng.random((7, 9, 3))
    k = rng.normal(size=(3, 5))
    ours = convolve2d(img, k)
    for c in range(3):
        assert np.allclose(ours[..., c], np.clip(convolve_naive(img[..., c], k), 0, 1), atol=1e-6)


def test_convolve_rejects_even_kernel(rng):
    with pytest.raises(InvalidArgument):
        convolve2d(rng.random((5, 5, 3)), np.ones((2, 2)))


def test_gaussian_kernel_normalized():
    k = gaussian_kernel1d(1.5)
    assert k.size == 2 * 5 + 1
    assert k.sum() == pytest.approx(1.0)
    assert np.allclose(k, k[::-1])


def test_gaussian_preserves_constant():
    img = np.full((10, 12, 3), 0.37)
    assert np.allclose(gaussian_filter(img, 2.0), 0.37, atol=1e-6)


@pytest.mark.parametrize("method", ["nearest", "bilinear"])
def test_resize_shape_and_constant(method):
    img = np.full((9, 7, 3), 0.25)
    out = resize(img, 14, 4, method)
    assert out.shape == (4, 14, 3)
    assert np.allclose(out, 0.25, atol=1e-6)


def test_resize_identity_is_exact(rng):
    img = rng.random((5, 6, 3)).astype(np.float32)
    for method in ("nearest", "bilinear"):
        assert np.array_equal(resize(img, 6, 5, method), img)


def test_bilinear_half_pixel_centers():
    img = np.zeros((1, 2, 3))
    img[0, 1] = 1.0
    out = resize(img, 4, 1, "bilinear")
    assert np.allclose(out[0, :, 0], [0.0, 0.25, 0.75, 1.0])


def test_resize_unknown_method():
    with pytest.raises(InvalidArgument):
        resize(np.zeros((4, 4, 3)), 2, 2, "bicubic")


def test_resize_zero_size():
    with pytest.raises(InvalidArgument):
        resize(np.zeros((4, 4, 3)), 0, 3)


def test_crop_bounds(rng):
    img = rng.random((10, 10, 3))
    assert crop(img, Rect(2, 3, 4, 5)).shape == (5, 4, 3)
    with pytest.raises(InvalidArgument):
        crop(img, Rect(8, 0, 4, 4))


def test_random_crop_in_bounds(rng):
    img = rng.random((20, 30, 3))
    for _ in range(20):
        patch, r = random_crop(img, 8, rng)
        assert patch.shape == (8, 8, 3)
        assert 0 <= r.x0 <= 22 and 0 <= r.y0 <= 12
        assert np.array_equal(patch, crop(img, r))


def test_psnr():
    a = np.zeros((4, 4, 3))
    assert psnr(a, a) == float("inf")
    assert psnr(a, a + 0.1) == pytest.approx(20.0, abs=1e-4)


def test_png_round_trip(tmp_path, rng):
    img = np.round(rng.random((6, 5, 3)) * 255) / 255
    write_image(tmp_path / "x.png", img)
    assert np.allclose(read_image(tmp_path / "x.png"), img, atol=1e-6)


def test_ycbcr_anchors():
    black = rgb_to_ycbcr(np.zeros((1, 1, 3)))[0, 0]
    white = rgb_to_ycbcr(np.ones((1, 1, 3)))[0, 0]
    assert np.allclose(black, [0, 0.5, 0.5]) and np.allclose(white, [1, 0.5, 0.5])


def test_pure_red_hsv():
    assert np.allclose(rgb_to_hsv(np.array([[[1.0, 0, 0]]]))[0, 0], [0, 1, 1])


def test_ramp_downscale_is_box_average():
    ramp = np.arange(16, dtype=np.float64).reshape(4, 4) / 15.0
    img = np.repeat(ramp[..., None], 3, axis=2)
    out = resize(img, 2, 2, "bilinear")[..., 0]
    box = ramp.reshape(2, 2, 2, 2).mean(axis=(1, 3))
    assert np.allclose(out, box, atol=1e-6)


def test_identity_kernel_and_box(rng):
    img = rng.random((5, 5, 3)).astype(np.float32)
    assert np.array_equal(convolve2d(img, np.ones((1, 1))), img)
    pattern = np.zeros((5, 5, 3))
    pattern[1::2, ::2] = 0.9
    box = np.full((3, 3), 1 / 9)
    assert np.allclose(convolve2d(pattern, box)[..., 0], convolve_naive(pattern[..., 0], box), atol=1e-6)


def test_full_crop_and_seeded_rect(rng):
    img = rng.random((6, 7, 3)).astype(np.float32)
    assert np.array_equal(crop(img, Rect(0, 0, 7, 6)), img)
    r1 = random_crop(img, 3, np.random.default_rng(5))[1]
    r2 = random_crop(img, 3, np.random.default_rng(5))[1]
    assert r1 == r2
    with pytest.raises(InvalidArgument):
        random_crop(img, 8, rng)


def test_random_crop_offsets_uniform():
    img = np.zeros((512, 512, 3), np.float32)
    rng = np.random.default_rng(8)
    xs, ys = [], []
    for _ in range(10**4):
        r = random_crop(img, 224, rng)[1]
        xs.append(r.x0)
        ys.append(r.y0)
    assert max(xs) <= 288 and max(ys) <= 288
    for v in (xs, ys):
        counts = np.bincount(np.array(v) * 17 // 289, minlength=17)
        assert stats.chisquare(counts).pvalue > 0.01


def test_psnr_anchors():
    assert psnr(np.zeros((3, 3, 3)), np.ones((3, 3, 3))) == pytest.approx(0.0)
    a = np.zeros((2, 2, 3))
    b = np.full((2, 2, 3), 0.1)
    assert psnr(a, b) == pytest.approx(20.0, abs=1e-4)
    with pytest.raises(InvalidArgument):
        psnr(a, np.zeros((3, 2, 3)))
