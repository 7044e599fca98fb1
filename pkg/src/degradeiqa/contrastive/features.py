"""A fixed 30-dimensional handcrafted quality descriptor used as a desk-scale encoder.

Standard deviations are computed after subtracting the first sample, which
leaves the variance unchanged but makes flat inputs give exactly zero.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..distortions.kernels import gradient_magnitude
from ..errors import InvalidArgument
from ..imgproc import _resize_raw, luminance, rgb_to_hsv, rgb_to_lab

FEATURE_DIM = 30
MIN_PATCH = 32

FEATURE_NAMES = (
    [f"{c}_{s}" for s in ("mean", "std") for c in "rgb"]
    + ["local_contrast_mean", "local_contrast_std"]
    + [f"grad_hist_{i}" for i in range(8)]
    + ["laplacian_energy", "colorfulness"]
    + [f"rescale_residual_{c}" for c in "rgb"]
    + ["lab_a_mean", "lab_b_mean", "lab_a_std", "lab_b_std"]
    + ["blockiness", "saturation_mean", "saturation_std", "distinct_levels", "impulse_fraction"]
)

# upper edges of the gradient-magnitude bins; exactly-zero gradients fall in no bin
GRAD_EDGES = np.array([0.0, 0.005, 0.01, 0.02, 0.04, 0.08, 0.16, 0.32, np.inf])
IMPULSE_THRESHOLD = 0.3


def _std(x: np.ndarray, axis=None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    ref = x.flat[0] if axis is None else x[0]
    return np.std(x - ref, axis=axis)


def _blockiness(y: np.ndarray, block: int = 8) -> float:
    """Mean absolute step across 8px block boundaries minus the mean step elsewhere."""
    dh = np.abs(np.diff(y, axis=1))
    dv = np.abs(np.diff(y, axis=0))
    on_h = (np.arange(dh.shape[1]) % block) == block - 1
    on_v = (np.arange(dv.shape[0]) % block) == block - 1
    boundary = np.concatenate([dh[:, on_h].ravel(), dv[on_v].ravel()])
    interior = np.concatenate([dh[:, ~on_h].ravel(), dv[~on_v].ravel()])
    if boundary.size == 0 or interior.size == 0:
        return 0.0
    return float(boundary.mean() - interior.mean())


def handcrafted_features(patch: np.ndarray) -> np.ndarray:
    a = np.asarray(patch, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3:
        raise InvalidArgument(f"expected an (H, W, 3) patch, got {a.shape}")
    h, w = a.shape[:2]
    if h < MIN_PATCH or w < MIN_PATCH:
        raise InvalidArgument(f"patch must be at least {MIN_PATCH}x{MIN_PATCH}, got {w}x{h}")

    feats: list[float] = []
    flat = a.reshape(-1, 3)
    feats += list(flat.mean(axis=0))
    feats += list(_std(flat, axis=0))

    y = luminance(a)
    local = ndimage.maximum_filter(y, size=3, mode="mirror") - ndimage.minimum_filter(
        y, size=3, mode="mirror"
    )
    feats += [local.mean(), _std(local)]

    g = gradient_magnitude(y)
    counts, _ = np.histogram(g[g > 0], bins=GRAD_EDGES)
    feats += list(counts / g.size)

    q = np.pad(y, 1, mode="edge")
    lap = (q[:-2, 1:-1] - y) + (q[2:, 1:-1] - y) + (q[1:-1, :-2] - y) + (q[1:-1, 2:] - y)
    feats.append(float(np.mean(lap * lap)))

    rg = a[..., 0] - a[..., 1]
    yb = 0.5 * (a[..., 0] + a[..., 1]) - a[..., 2]
    feats.append(
        float(np.hypot(_std(rg), _std(yb)) + 0.3 * np.hypot(rg.mean(), yb.mean()))
    )

    small = _resize_raw(a, max(1, w // 2), max(1, h // 2), "bilinear")
    back = _resize_raw(small, w, h, "bilinear")
    feats += list(np.abs(a - back).reshape(-1, 3).mean(axis=0))

    lab = rgb_to_lab(a)
    ab = lab[..., 1:].reshape(-1, 2) / 100.0
    feats += list(ab.mean(axis=0)) + list(_std(ab, axis=0))

    feats.append(_blockiness(y))

    sat = rgb_to_hsv(np.clip(a, 0.0, 1.0))[..., 1]
    feats += [sat.mean(), _std(sat)]

    feats.append(np.unique(np.rint(y * 255.0)).size / 256.0)

    med = ndimage.median_filter(y, size=3, mode="mirror")
    feats.append(float(np.mean(np.abs(y - med) > IMPULSE_THRESHOLD)))

    out = np.asarray(feats, dtype=np.float64)
    assert out.size == FEATURE_DIM
    return out


def batch_features(views: np.ndarray, fn=handcrafted_features) -> np.ndarray:
    return np.stack([fn(v) for v in views])
