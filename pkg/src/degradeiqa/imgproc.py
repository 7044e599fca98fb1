"""Pixel-level primitives shared by the distortion kernels and the batch builder.

Images are ``(H, W, 3)`` float32 arrays with RGB values in ``[0, 1]``.  Every
public function leaves its input untouched and clamps its returned image to
``[0, 1]`` exactly once.  Color-space forward transforms return float64 arrays
in the native range of that space (they are not images); the matching inverse
transforms return clamped RGB images.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Literal, NamedTuple

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import InvalidArgument

__all__ = [
    "Rect",
    "as_image",
    "to_uint8",
    "read_image",
    "write_image",
    "rgb_to_ycbcr",
    "ycbcr_to_rgb",
    "rgb_to_hsv",
    "hsv_to_rgb",
    "rgb_to_lab",
    "lab_to_rgb",
    "luminance",
    "resize",
    "convolve2d",
    "gaussian_kernel1d",
    "gaussian_filter",
    "crop",
    "random_crop",
    "psnr",
]


class Rect(NamedTuple):
    x0: int
    y0: int
    w: int
    h: int


def as_image(arr) -> np.ndarray:
    """Validate ``arr`` as an RGB image and return it as float32 in [0, 1].

    uint8 input is scaled by 1/255.  Float input is clamped.
    """
    a = np.asarray(arr)
    if a.ndim != 3 or a.shape[2] != 3:
        raise InvalidArgument(f"expected an (H, W, 3) image, got shape {a.shape}")
    if a.shape[0] < 1 or a.shape[1] < 1:
        raise InvalidArgument("image has a zero dimension")
    if a.dtype == np.uint8:
        return a.astype(np.float32) / np.float32(255.0)
    return _finish(a)


def _finish(a: np.ndarray) -> np.ndarray:
    return np.clip(a, 0.0, 1.0).astype(np.float32)


def to_uint8(img: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(img, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def read_image(path: str | Path) -> np.ndarray:
    with Image.open(path) as im:
        return as_image(np.asarray(im.convert("RGB")))


def write_image(path: str | Path, img: np.ndarray, quality: int = 95) -> None:
    """Write an 8-bit RGB file; format follows the file extension (PNG or JPEG)."""
    path = Path(path)
    pil = Image.fromarray(to_uint8(img), mode="RGB")
    if path.suffix.lower() in (".jpg", ".jpeg"):
        pil.save(path, format="JPEG", quality=quality)
    else:
        pil.save(path, format="PNG")


# --------------------------------------------------------------------------
# color spaces

_KB, _KR = 0.114, 0.299
_KG = 1.0 - _KB - _KR


def luminance(img: np.ndarray) -> np.ndarray:
    """BT.601 luma plane (float64)."""
    a = np.asarray(img, dtype=np.float64)
    return _KR * a[..., 0] + _KG * a[..., 1] + _KB * a[..., 2]


def rgb_to_ycbcr(img: np.ndarray) -> np.ndarray:
    """Full-range BT.601 YCbCr; all three outputs nominally in [0, 1]."""
    a = np.asarray(img, dtype=np.float64)
    y = luminance(a)
    cb = 0.5 + (a[..., 2] - y) / (2.0 * (1.0 - _KB))
    cr = 0.5 + (a[..., 0] - y) / (2.0 * (1.0 - _KR))
    return np.stack([y, cb, cr], axis=-1)


def ycbcr_to_rgb(ycc: np.ndarray, clip: bool = True) -> np.ndarray:
    a = np.asarray(ycc, dtype=np.float64)
    y, cb, cr = a[..., 0], a[..., 1] - 0.5, a[..., 2] - 0.5
    r = y + 2.0 * (1.0 - _KR) * cr
    b = y + 2.0 * (1.0 - _KB) * cb
    g = (y - _KR * r - _KB * b) / _KG
    out = np.stack([r, g, b], axis=-1)
    return _finish(out) if clip else out


def rgb_to_hsv(img: np.ndarray) -> np.ndarray:
    """HSV with hue in degrees [0, 360), saturation and value in [0, 1]."""
    a = np.asarray(img, dtype=np.float64)
    r, g, b = a[..., 0], a[..., 1], a[..., 2]
    v = a.max(axis=-1)
    c = v - a.min(axis=-1)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)
    safe_c = np.where(c > 0, c, 1.0)
    h = np.where(
        v == r,
        ((g - b) / safe_c) % 6.0,
        np.where(v == g, (b - r) / safe_c + 2.0, (r - g) / safe_c + 4.0),
    )
    h = np.where(c > 0, h * 60.0, 0.0) % 360.0
    return np.stack([h, s, v], axis=-1)


def hsv_to_rgb(hsv: np.ndarray, clip: bool = True) -> np.ndarray:
    a = np.asarray(hsv, dtype=np.float64)
    h, s, v = a[..., 0] % 360.0, a[..., 1], a[..., 2]
    c = v * s
    hp = h / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    m = v - c
    sector = np.floor(hp).astype(int) % 6
    zeros = np.zeros_like(c)
    table = [
        (c, x, zeros),
        (x, c, zeros),
        (zeros, c, x),
        (zeros, x, c),
        (x, zeros, c),
        (c, zeros, x),
    ]
    out = np.zeros(a.shape, dtype=np.float64)
    for idx, (rr, gg, bb) in enumerate(table):
        sel = sector == idx
        out[..., 0] = np.where(sel, rr, out[..., 0])
        out[..., 1] = np.where(sel, gg, out[..., 1])
        out[..., 2] = np.where(sel, bb, out[..., 2])
    out += m[..., None]
    return _finish(out) if clip else out


# sRGB (D65) to CIE XYZ
_RGB2XYZ = np.array(
    [
        [0.412453, 0.357580, 0.180423],
        [0.212671, 0.715160, 0.072169],
        [0.019334, 0.119193, 0.950227],
    ]
)
_XYZ2RGB = np.linalg.inv(_RGB2XYZ)
_D65 = _RGB2XYZ @ np.ones(3)  # reference white = XYZ of RGB (1, 1, 1)
_EPS = (6.0 / 29.0) ** 3
_KAPPA = (29.0 / 6.0) ** 2 / 3.0


def _srgb_to_linear(c: np.ndarray) -> np.ndarray:
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _linear_to_srgb(c: np.ndarray) -> np.ndarray:
    c = np.maximum(c, 0.0)
    return np.where(c <= 0.0031308, c * 12.92, 1.055 * c ** (1.0 / 2.4) - 0.055)


def rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """CIE 1976 L*a*b* under D65; L in [0, 100]."""
    a = _srgb_to_linear(np.asarray(img, dtype=np.float64))
    xyz = a @ _RGB2XYZ.T / _D65
    f = np.where(xyz > _EPS, np.cbrt(xyz), _KAPPA * xyz + 4.0 / 29.0)
    L = 116.0 * f[..., 1] - 16.0
    A = 500.0 * (f[..., 0] - f[..., 1])
    B = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, A, B], axis=-1)


def lab_to_rgb(lab: np.ndarray, clip: bool = True) -> np.ndarray:
    a = np.asarray(lab, dtype=np.float64)
    fy = (a[..., 0] + 16.0) / 116.0
    fx = fy + a[..., 1] / 500.0
    fz = fy - a[..., 2] / 200.0
    f = np.stack([fx, fy, fz], axis=-1)
    xyz = np.where(f > 6.0 / 29.0, f**3, (f - 4.0 / 29.0) / _KAPPA) * _D65
    out = _linear_to_srgb(xyz @ _XYZ2RGB.T)
    return _finish(out) if clip else out


# --------------------------------------------------------------------------
# resampling and filtering


def _sample_axis(n_in: int, n_out: int, method: str):
    scale = n_in / n_out
    if method == "nearest":
        idx = np.minimum(np.floor((np.arange(n_out) + 0.5) * scale).astype(int), n_in - 1)
        return idx, idx, np.zeros(n_out)
    x = np.clip((np.arange(n_out) + 0.5) * scale - 0.5, 0.0, n_in - 1)
    i0 = np.floor(x).astype(int)
    i1 = np.minimum(i0 + 1, n_in - 1)
    return i0, i1, x - i0


def _resize_raw(a: np.ndarray, out_w: int, out_h: int, method: str) -> np.ndarray:
    h, w = a.shape[:2]
    r0, r1, wy = _sample_axis(h, out_h, method)
    c0, c1, wx = _sample_axis(w, out_w, method)
    # lerp written as a + t*(b - a) so constant regions stay bit-exact
    wy = wy.reshape((-1,) + (1,) * (a.ndim - 1))
    top, bot = a[r0], a[r1]
    rows = top + wy * (bot - top)
    wx = wx.reshape((1, -1) + (1,) * (a.ndim - 2))
    left, right = rows[:, c0], rows[:, c1]
    return left + wx * (right - left)


def resize(
    img: np.ndarray,
    out_w: int,
    out_h: int,
    method: Literal["nearest", "bilinear"] = "bilinear",
) -> np.ndarray:
    """Resize to exactly ``(out_w, out_h)`` with half-pixel-center alignment."""
    if out_w < 1 or out_h < 1:
        raise InvalidArgument(f"target size must be positive, got {out_w}x{out_h}")
    if method not in ("nearest", "bilinear"):
        raise InvalidArgument(f"unknown resize method {method!r}")
    a = np.asarray(img)
    if a.shape[0] == out_h and a.shape[1] == out_w:
        return _finish(a)
    return _finish(_resize_raw(a.astype(np.float64), out_w, out_h, method))


def _check_kernel(kernel: np.ndarray) -> np.ndarray:
    k = np.asarray(kernel, dtype=np.float64)
    if k.ndim != 2:
        raise InvalidArgument("kernel must be 2-D")
    if k.shape[0] % 2 == 0 or k.shape[1] % 2 == 0:
        raise InvalidArgument(f"kernel dimensions must be odd, got {k.shape}")
    return k


def _convolve_planes(a: np.ndarray, k: np.ndarray) -> np.ndarray:
    if a.ndim == 2:
        return ndimage.convolve(a, k, mode="mirror")
    return np.stack(
        [ndimage.convolve(a[..., c], k, mode="mirror") for c in range(a.shape[2])], axis=-1
    )


def convolve2d(img: np.ndarray, kernel: np.ndarray, border: str = "reflect") -> np.ndarray:
    """Per-channel 2-D convolution with reflect-101 borders."""
    if border != "reflect":
        raise InvalidArgument(f"unsupported border mode {border!r}")
    k = _check_kernel(kernel)
    return _finish(_convolve_planes(np.asarray(img, dtype=np.float64), k))


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalized 1-D Gaussian taps with radius ceil(3 sigma)."""
    if sigma <= 0:
        raise InvalidArgument("sigma must be positive")
    radius = max(1, math.ceil(3.0 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _gaussian_raw(a: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian over the two spatial axes of a float64 array."""
    k = gaussian_kernel1d(sigma)
    out = ndimage.convolve1d(a, k, axis=0, mode="mirror")
    return ndimage.convolve1d(out, k, axis=1, mode="mirror")


def gaussian_filter(img: np.ndarray, sigma: float) -> np.ndarray:
    return _finish(_gaussian_raw(np.asarray(img, dtype=np.float64), sigma))


# --------------------------------------------------------------------------
# cropping and metrics


def crop(img: np.ndarray, rect: Rect) -> np.ndarray:
    a = np.asarray(img)
    h, w = a.shape[:2]
    x0, y0, rw, rh = rect
    if rw <= 0 or rh <= 0 or x0 < 0 or y0 < 0 or x0 + rw > w or y0 + rh > h:
        raise InvalidArgument(f"crop {tuple(rect)} outside {w}x{h} image")
    return _finish(a[y0 : y0 + rh, x0 : x0 + rw])


def random_crop(img: np.ndarray, size: int, rng: np.random.Generator) -> tuple[np.ndarray, Rect]:
    """Square crop at an offset drawn uniformly from the valid range."""
    h, w = np.asarray(img).shape[:2]
    if size < 1 or h < size or w < size:
        raise InvalidArgument(f"cannot take a {size}px crop from a {w}x{h} image")
    x0 = int(rng.integers(0, w - size + 1))
    y0 = int(rng.integers(0, h - size + 1))
    rect = Rect(x0, y0, size, size)
    return crop(img, rect), rect


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for unit peak; ``inf`` for identical images."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise InvalidArgument(f"shape mismatch {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
