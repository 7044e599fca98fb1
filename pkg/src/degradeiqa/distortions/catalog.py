"""The 24 distortion kinds and the 7 groups they belong to."""

from __future__ import annotations

from types import MappingProxyType

from ..errors import InvalidArgument

N_LEVELS = 5

GROUPS: dict[str, tuple[str, ...]] = {
    "brightness": ("brighten", "darken", "mean_shift"),
    "blur": ("gaussian_blur", "lens_blur", "motion_blur"),
    "spatial": ("jitter", "non_eccentricity_patch", "pixelate", "quantization", "color_block"),
    "noise": ("white_noise", "white_noise_cc", "impulse_noise", "multiplicative_noise"),
    "color": ("color_diffusion", "color_shift", "color_saturation_1", "color_saturation_2"),
    "compression": ("jpeg2000", "jpeg"),
    "sharpness_contrast": ("high_sharpen", "nonlinear_contrast", "linear_contrast"),
}
GROUPS = MappingProxyType(GROUPS)  # type: ignore[assignment]

GROUP_NAMES: tuple[str, ...] = tuple(GROUPS)
KINDS: tuple[str, ...] = tuple(k for kinds in GROUPS.values() for k in kinds)
GROUP_OF: dict[str, str] = {k: g for g, kinds in GROUPS.items() for k in kinds}
GROUP_SIZES: tuple[int, ...] = tuple(len(v) for v in GROUPS.values())

STOCHASTIC_KINDS = frozenset(
    {
        "motion_blur",
        "jitter",
        "non_eccentricity_patch",
        "color_block",
        "white_noise",
        "white_noise_cc",
        "impulse_noise",
        "multiplicative_noise",
        "color_shift",
    }
)


def group_of(kind: str) -> str:
    try:
        return GROUP_OF[kind]
    except KeyError:
        raise InvalidArgument(f"unknown distortion kind {kind!r}") from None


def check_level(level: int) -> int:
    if isinstance(level, bool) or int(level) != level or not 1 <= level <= N_LEVELS:
        raise InvalidArgument(f"level must be an integer in [1, {N_LEVELS}], got {level!r}")
    return int(level)
