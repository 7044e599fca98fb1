"""The 24 distortion kinds, their severity ladders, and the uniform dispatcher."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgument, UnsupportedDistortion
from ..imgproc import _finish
from .catalog import (
    GROUP_NAMES,
    GROUP_OF,
    GROUP_SIZES,
    GROUPS,
    KINDS,
    N_LEVELS,
    STOCHASTIC_KINDS,
    check_level,
    group_of,
)
from .codecs import (
    Jpeg2000Codec,
    PillowJpeg2000Codec,
    get_jpeg2000_codec,
    register_jpeg2000_codec,
)
from .kernels import KERNELS
from .ladders import (
    DEFAULT_LADDERS,
    DEFAULT_TABLE,
    LADDER_ENV_VAR,
    LADDER_VERSION,
    LadderTable,
    load_ladders,
    severity_ladder,
)

__all__ = [
    "DEFAULT_LADDERS",
    "DEFAULT_TABLE",
    "GROUPS",
    "GROUP_NAMES",
    "GROUP_OF",
    "GROUP_SIZES",
    "KERNELS",
    "KINDS",
    "LADDER_ENV_VAR",
    "LADDER_VERSION",
    "N_LEVELS",
    "STOCHASTIC_KINDS",
    "Jpeg2000Codec",
    "LadderTable",
    "PillowJpeg2000Codec",
    "apply_distortion",
    "check_level",
    "get_jpeg2000_codec",
    "group_of",
    "is_supported",
    "load_ladders",
    "register_jpeg2000_codec",
    "severity_ladder",
]


def is_supported(kind: str) -> bool:
    group_of(kind)
    return kind != "jpeg2000" or get_jpeg2000_codec() is not None


def apply_distortion(
    img: np.ndarray,
    kind: str,
    level: int,
    rng: np.random.Generator,
    ladders: LadderTable | None = None,
) -> np.ndarray:
    """Apply one distortion at ``level`` (1..5) and return a new clamped image.

    ``rng`` is mandatory for every kind so callers keep a fixed stream layout;
    deterministic kinds simply draw nothing from it.
    """
    group_of(kind)
    level = check_level(level)
    if not isinstance(rng, np.random.Generator):
        raise InvalidArgument("rng must be a numpy Generator")
    if not is_supported(kind):
        raise UnsupportedDistortion(kind)
    params = (ladders or DEFAULT_TABLE).params(kind, level)
    a = np.asarray(img, dtype=np.float64)
    if a.ndim != 3 or a.shape[2] != 3:
        raise InvalidArgument(f"expected an (H, W, 3) image, got shape {a.shape}")
    return _finish(KERNELS[kind](a, params, rng))
