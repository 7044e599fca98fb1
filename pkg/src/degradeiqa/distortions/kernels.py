"""Distortion kernels.

Each kernel maps ``(image float64 HxWx3, params, rng)`` to an unclamped float64
array; :func:`degradeiqa.distortions.apply_distortion` clamps the result.
Deterministic kernels never touch ``rng``.
"""

from __future__ import annotations

import io
import math
from typing import Any, Callable

import numpy as np
from PIL import Image

from ..errors import UnsupportedDistortion
from ..imgproc import (
    _convolve_planes,
    _gaussian_raw,
    _resize_raw,
    hsv_to_rgb,
    lab_to_rgb,
    luminance,
    rgb_to_hsv,
    rgb_to_lab,
    rgb_to_ycbcr,
    to_uint8,
    ycbcr_to_rgb,
)
from .codecs import get_jpeg2000_codec
from .multiotsu import quantize_plane

Params = dict[str, Any]
Kernel = Callable[[np.ndarray, Params, np.random.Generator], np.ndarray]

KERNELS: dict[str, Kernel] = {}


def kernel(name: str):
    def deco(fn: Kernel) -> Kernel:
        KERNELS[name] = fn
        return fn

    return deco


# -- brightness ------------------------------------------------------------


def _lift_curve(x):
    return 1.0 - (1.0 - np.clip(x, 0.0, 1.0)) ** 3


def _drop_curve(x):
    return np.clip(x, 0.0, 1.0) ** 3


@kernel("brighten")
def brighten(a, p, rng):
    return a + p["blend"] * (_lift_curve(a) - a)


@kernel("darken")
def darken(a, p, rng):
    return a + p["blend"] * (_drop_curve(a) - a)


@kernel("mean_shift")
def mean_shift(a, p, rng):
    return a + p["shift"]


# -- blur ------------------------------------------------------------------


@kernel("gaussian_blur")
def gaussian_blur(a, p, rng):
    return _gaussian_raw(a, p["sigma"])


def disk_kernel(radius: int) -> np.ndarray:
    r = int(radius)
    y, x = np.mgrid[-r : r + 1, -r : r + 1]
    k = (x * x + y * y <= r * r).astype(np.float64)
    return k / k.sum()


@kernel("lens_blur")
def lens_blur(a, p, rng):
    return _convolve_planes(a, disk_kernel(p["radius"]))


def motion_kernel(length: int, angle: float) -> np.ndarray:
    """Normalized line kernel of odd size ``length`` through the center at ``angle`` rad."""
    n = int(length) | 1
    c = n // 2
    t = np.linspace(-c, c, 4 * n)
    xs = np.rint(c + t * math.cos(angle)).astype(int)
    ys = np.rint(c - t * math.sin(angle)).astype(int)
    k = np.zeros((n, n))
    np.add.at(k, (ys, xs), 1.0)
    return k / k.sum()


@kernel("motion_blur")
def motion_blur(a, p, rng):
    angle = rng.uniform(0.0, math.pi)
    return _convolve_planes(a, motion_kernel(p["length"], angle))


# -- spatial ---------------------------------------------------------------


@kernel("jitter")
def jitter(a, p, rng):
    h, w = a.shape[:2]
    d = int(p["amplitude"])
    dy, dx = rng.integers(-d, d + 1, size=(2, h, w))
    yy = np.clip(np.arange(h)[:, None] + dy, 0, h - 1)
    xx = np.clip(np.arange(w)[None, :] + dx, 0, w - 1)
    return a[yy, xx]


@kernel("non_eccentricity_patch")
def non_eccentricity_patch(a, p, rng):
    h, w = a.shape[:2]
    ps = int(min(p["patch"], h, w))
    m = int(p["max_offset"])
    out = a.copy()
    for _ in range(int(p["n_patches"])):
        y0, x0 = rng.integers(0, h - ps + 1), rng.integers(0, w - ps + 1)
        dy, dx = rng.integers(-m, m + 1, size=2)
        y1 = int(np.clip(y0 + dy, 0, h - ps))
        x1 = int(np.clip(x0 + dx, 0, w - ps))
        out[y1 : y1 + ps, x1 : x1 + ps] = a[y0 : y0 + ps, x0 : x0 + ps]
    return out


@kernel("pixelate")
def pixelate(a, p, rng):
    h, w = a.shape[:2]
    sw = max(1, round(w * p["factor"]))
    sh = max(1, round(h * p["factor"]))
    small = _resize_raw(a, sw, sh, "nearest")
    return _resize_raw(small, w, h, "nearest")


@kernel("quantization")
def quantization(a, p, rng):
    a = np.clip(a, 0.0, 1.0)
    n = int(p["n_classes"])
    return np.stack([quantize_plane(a[..., c], n) for c in range(3)], axis=-1)


@kernel("color_block")
def color_block(a, p, rng):
    h, w = a.shape[:2]
    side = max(1, round(p["side_frac"] * min(h, w)))
    out = a.copy()
    for _ in range(int(p["n_blocks"])):
        y, x = rng.integers(0, h - side + 1), rng.integers(0, w - side + 1)
        out[y : y + side, x : x + side] = rng.random(3)
    return out


# -- noise -----------------------------------------------------------------


@kernel("white_noise")
def white_noise(a, p, rng):
    return a + rng.normal(0.0, p["sigma"], size=a.shape)


@kernel("white_noise_cc")
def white_noise_cc(a, p, rng):
    ycc = rgb_to_ycbcr(a) + rng.normal(0.0, p["sigma"], size=a.shape)
    return ycbcr_to_rgb(ycc, clip=False)


@kernel("impulse_noise")
def impulse_noise(a, p, rng):
    h, w = a.shape[:2]
    hit = rng.random((h, w)) < p["prob"]
    salt = rng.random((h, w)) < 0.5
    out = a.copy()
    out[hit & salt] = 1.0
    out[hit & ~salt] = 0.0
    return out


@kernel("multiplicative_noise")
def multiplicative_noise(a, p, rng):
    return a * (1.0 + rng.normal(0.0, p["sigma"], size=a.shape))


# -- color -----------------------------------------------------------------


@kernel("color_diffusion")
def color_diffusion(a, p, rng):
    lab = rgb_to_lab(a)
    lab[..., 1:] = _gaussian_raw(lab[..., 1:], p["sigma"])
    return lab_to_rgb(lab, clip=False)


def gradient_magnitude(plane: np.ndarray) -> np.ndarray:
    """Sobel magnitude with replicated borders (exactly zero on flat regions)."""
    q = np.pad(plane, 1, mode="edge")
    dx_rows = q[:, 2:] - q[:, :-2]
    dy_cols = q[2:, :] - q[:-2, :]
    gx = dx_rows[:-2] + 2.0 * dx_rows[1:-1] + dx_rows[2:]
    gy = dy_cols[:, :-2] + 2.0 * dy_cols[:, 1:-1] + dy_cols[:, 2:]
    return np.hypot(gx, gy) / 8.0


@kernel("color_shift")
def color_shift(a, p, rng):
    h, w = a.shape[:2]
    theta = rng.uniform(0.0, 2.0 * math.pi)
    dx = int(round(p["shift"] * math.cos(theta)))
    dy = int(round(p["shift"] * math.sin(theta)))
    yy = np.clip(np.arange(h) - dy, 0, h - 1)
    xx = np.clip(np.arange(w) - dx, 0, w - 1)
    shifted = a[yy][:, xx, 1]
    g = gradient_magnitude(luminance(a))
    peak = g.max()
    weight = g / peak if peak > 0 else g
    out = a.copy()
    out[..., 1] = a[..., 1] + weight * (shifted - a[..., 1])
    return out


@kernel("color_saturation_1")
def color_saturation_1(a, p, rng):
    hsv = rgb_to_hsv(np.clip(a, 0.0, 1.0))
    hsv[..., 1] *= p["factor"]
    return hsv_to_rgb(hsv, clip=False)


@kernel("color_saturation_2")
def color_saturation_2(a, p, rng):
    lab = rgb_to_lab(a)
    lab[..., 1:] *= p["factor"]
    return lab_to_rgb(lab, clip=False)


# -- compression -----------------------------------------------------------


@kernel("jpeg2000")
def jpeg2000(a, p, rng):
    codec = get_jpeg2000_codec()
    if codec is None:
        raise UnsupportedDistortion("jpeg2000")
    out = codec.decode(codec.encode(np.clip(a, 0.0, 1.0), p["bpp"]))
    return np.asarray(out, dtype=np.float64)


@kernel("jpeg")
def jpeg(a, p, rng):
    buf = io.BytesIO()
    Image.fromarray(to_uint8(a), mode="RGB").save(buf, format="JPEG", quality=int(p["quality"]))
    buf.seek(0)
    with Image.open(buf) as im:
        return np.asarray(im.convert("RGB"), dtype=np.float64) / 255.0


# -- sharpness and contrast --------------------------------------------------


@kernel("high_sharpen")
def high_sharpen(a, p, rng):
    lab = rgb_to_lab(a)
    light = lab[..., 0]
    # kernel radius ceil(3 sigma) equals the ladder radius
    blurred = _gaussian_raw(light, p["radius"] / 3.0)
    lab[..., 0] = light + p["amount"] * (light - blurred)
    return lab_to_rgb(lab, clip=False)


@kernel("nonlinear_contrast")
def nonlinear_contrast(a, p, rng):
    t = 2.0 * np.clip(a, 0.0, 1.0) - 1.0
    return 0.5 + 0.5 * np.sign(t) * np.abs(t) ** (1.0 / p["gamma"])


@kernel("linear_contrast")
def linear_contrast(a, p, rng):
    m = a.mean()
    return m + p["factor"] * (a - m)
