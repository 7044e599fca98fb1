"""Procedural stand-in images: smooth shading, flat shapes, edges, and texture."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .imgproc import _finish, _gaussian_raw, write_image


def synthetic_image(rng: np.random.Generator, height: int = 128, width: int = 128) -> np.ndarray:
    yy, xx = np.mgrid[0:height, 0:width] / max(height, width)
    c0, c1, c2 = rng.random((3, 3))
    gy, gx = rng.uniform(-1, 1, 2)
    t = np.clip(0.5 + 0.5 * (gy * yy + gx * xx), 0, 1)[..., None]
    img = c0 * (1 - t) + c1 * t
    for _ in range(int(rng.integers(4, 9))):
        color = rng.random(3)
        cy, cx = rng.uniform(0, height), rng.uniform(0, width)
        ry, rx = rng.uniform(0.05, 0.3, 2) * (height, width)
        if rng.random() < 0.5:
            mask = ((np.arange(height)[:, None] - cy) / ry) ** 2 + (
                (np.arange(width)[None, :] - cx) / rx
            ) ** 2 <= 1
        else:
            mask = (np.abs(np.arange(height)[:, None] - cy) <= ry) & (
                np.abs(np.arange(width)[None, :] - cx) <= rx
            )
        img[mask] = color
    freq = rng.uniform(4, 16)
    phase = rng.uniform(0, 2 * np.pi)
    texture = np.sin(2 * np.pi * freq * (xx * np.cos(phase) + yy * np.sin(phase)))
    img = img + 0.06 * texture[..., None] * c2
    img = img + rng.normal(0, 0.02, img.shape)
    return _finish(_gaussian_raw(img, 0.6))


def synthetic_corpus(n: int, seed: int = 0, height: int = 128, width: int = 128) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [synthetic_image(rng, height, width) for _ in range(n)]


def write_corpus(directory: str | Path, n: int, seed: int = 0, height: int = 128, width: int = 128):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, img in enumerate(synthetic_corpus(n, seed, height, width)):
        path = directory / f"img_{i:04d}.png"
        write_image(path, img)
        paths.append(path)
    return paths
