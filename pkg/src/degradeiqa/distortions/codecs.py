"""Pluggable JPEG2000 codec adapter.

An adapter is any object with ``encode(img, bpp) -> bytes`` and
``decode(data) -> img``.  A Pillow/OpenJPEG adapter is registered at import
time when Pillow was built with JPEG2000 support.
"""

from __future__ import annotations

import io
from typing import Protocol

import numpy as np
from PIL import Image, features

from ..imgproc import as_image, to_uint8


class Jpeg2000Codec(Protocol):
    def encode(self, img: np.ndarray, bpp: float) -> bytes: ...

    def decode(self, data: bytes) -> np.ndarray: ...


class PillowJpeg2000Codec:
    """OpenJPEG through Pillow, irreversible 9/7 wavelet at a target bit rate."""

    def encode(self, img: np.ndarray, bpp: float) -> bytes:
        u8 = to_uint8(img)
        h, w = u8.shape[:2]
        # each decomposition level halves the smallest side; OpenJPEG needs >= 1px
        levels = max(1, min(6, int(np.log2(max(1, min(h, w)))) - 1))
        buf = io.BytesIO()
        Image.fromarray(u8, mode="RGB").save(
            buf,
            format="JPEG2000",
            irreversible=True,
            quality_mode="rates",
            quality_layers=[24.0 / bpp],
            num_resolutions=levels + 1,
            no_jp2=True,
        )
        return buf.getvalue()

    def decode(self, data: bytes) -> np.ndarray:
        with Image.open(io.BytesIO(data)) as im:
            return as_image(np.asarray(im.convert("RGB")))


_registry: dict[str, Jpeg2000Codec | None] = {"jpeg2000": None}


def register_jpeg2000_codec(codec: Jpeg2000Codec | None) -> Jpeg2000Codec | None:
    """Install ``codec`` (or ``None`` to remove); returns the previous adapter."""
    previous = _registry["jpeg2000"]
    _registry["jpeg2000"] = codec
    return previous


def get_jpeg2000_codec() -> Jpeg2000Codec | None:
    return _registry["jpeg2000"]


if features.check("jpg_2000"):
    register_jpeg2000_codec(PillowJpeg2000Codec())
