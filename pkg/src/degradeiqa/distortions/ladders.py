"""Severity ladders: the 5-entry parameter table of every distortion kind.

The shipped table is versioned so tests can pin exact outputs.  A JSON override
file may replace the ladders of any subset of kinds::

    {"version": "user-1", "ladders": {"jpeg": [{"quality": 50}, ...]}}
"""

from __future__ import annotations

import copy
import json
import os
from pathlib import Path
from typing import Any

import jsonschema

from ..errors import InvalidConfiguration
from .catalog import KINDS, N_LEVELS, group_of

LADDER_VERSION = "2024.1"
LADDER_ENV_VAR = "DEGRADEIQA_LADDERS"

# kind -> (severity parameter, +1 if severity grows with the value else -1)
SEVERITY_KEY: dict[str, tuple[str, int]] = {
    "brighten": ("blend", 1),
    "darken": ("blend", 1),
    "mean_shift": ("shift", 1),
    "gaussian_blur": ("sigma", 1),
    "lens_blur": ("radius", 1),
    "motion_blur": ("length", 1),
    "jitter": ("amplitude", 1),
    "non_eccentricity_patch": ("n_patches", 1),
    "pixelate": ("factor", -1),
    "quantization": ("n_classes", -1),
    "color_block": ("n_blocks", 1),
    "white_noise": ("sigma", 1),
    "white_noise_cc": ("sigma", 1),
    "impulse_noise": ("prob", 1),
    "multiplicative_noise": ("sigma", 1),
    "color_diffusion": ("sigma", 1),
    "color_shift": ("shift", 1),
    "color_saturation_1": ("factor", -1),
    "color_saturation_2": ("factor", 1),
    "jpeg2000": ("bpp", -1),
    "jpeg": ("quality", -1),
    "high_sharpen": ("amount", 1),
    "nonlinear_contrast": ("gamma", 1),
    "linear_contrast": ("factor", -1),
}


def _ladder(key: str, values, **fixed) -> list[dict[str, Any]]:
    return [{key: v, **fixed} for v in values]


DEFAULT_LADDERS: dict[str, list[dict[str, Any]]] = {
    "brighten": _ladder("blend", [0.2, 0.4, 0.6, 0.8, 1.0]),
    "darken": _ladder("blend", [0.2, 0.4, 0.6, 0.8, 1.0]),
    "mean_shift": _ladder("shift", [0.04, 0.08, 0.12, 0.16, 0.20]),
    "gaussian_blur": _ladder("sigma", [0.8, 1.6, 2.4, 3.2, 4.0]),
    "lens_blur": _ladder("radius", [1, 2, 4, 6, 8]),
    "motion_blur": _ladder("length", [5, 9, 13, 17, 21]),
    "jitter": _ladder("amplitude", [1, 2, 3, 4, 5]),
    "non_eccentricity_patch": _ladder("n_patches", [10, 20, 30, 40, 50], patch=16, max_offset=16),
    "pixelate": _ladder("factor", [0.5, 0.4, 0.3, 0.2, 0.1]),
    "quantization": _ladder("n_classes", [8, 7, 6, 5, 4]),
    "color_block": _ladder("n_blocks", [2, 4, 6, 8, 10], side_frac=0.1),
    "white_noise": _ladder("sigma", [0.05, 0.10, 0.15, 0.20, 0.25]),
    "white_noise_cc": _ladder("sigma", [0.05, 0.10, 0.15, 0.20, 0.25]),
    "impulse_noise": _ladder("prob", [0.02, 0.05, 0.10, 0.15, 0.20]),
    "multiplicative_noise": _ladder("sigma", [0.10, 0.20, 0.30, 0.45, 0.60]),
    "color_diffusion": _ladder("sigma", [1, 3, 6, 10, 15]),
    "color_shift": _ladder("shift", [2, 4, 8, 12, 16]),
    "color_saturation_1": _ladder("factor", [0.7, 0.5, 0.3, 0.15, 0.0]),
    "color_saturation_2": _ladder("factor", [1.5, 2, 3, 4, 6]),
    "jpeg2000": _ladder("bpp", [0.5, 0.25, 0.12, 0.06, 0.03]),
    "jpeg": _ladder("quality", [43, 25, 15, 10, 7]),
    "high_sharpen": _ladder("amount", [1, 2, 3, 6, 12], radius=3),
    "nonlinear_contrast": _ladder("gamma", [1.3, 1.6, 2.0, 2.5, 3.0]),
    "linear_contrast": _ladder("factor", [0.85, 0.7, 0.55, 0.4, 0.3]),
}

LADDER_SCHEMA = {
    "type": "object",
    "required": ["ladders"],
    "additionalProperties": False,
    "properties": {
        "version": {"type": "string"},
        "ladders": {
            "type": "object",
            "propertyNames": {"enum": list(KINDS)},
            "additionalProperties": {
                "type": "array",
                "minItems": N_LEVELS,
                "maxItems": N_LEVELS,
                "items": {
                    "type": "object",
                    "minProperties": 1,
                    "additionalProperties": {"type": "number"},
                },
            },
        },
    },
}


class LadderTable:
    """Immutable view over the parameter records of all 24 kinds."""

    def __init__(self, ladders: dict[str, list[dict[str, Any]]], version: str = LADDER_VERSION):
        missing = set(KINDS) - set(ladders)
        if missing:
            raise InvalidConfiguration(f"ladder table missing kinds: {sorted(missing)}")
        for kind in KINDS:
            _check_ladder(kind, ladders[kind])
        self._ladders = {k: [dict(r) for r in ladders[k]] for k in KINDS}
        self.version = version

    def __getitem__(self, kind: str) -> list[dict[str, Any]]:
        return [dict(r) for r in self._ladders[kind]]

    def params(self, kind: str, level: int) -> dict[str, Any]:
        return dict(self._ladders[kind][level - 1])

    def to_json(self) -> dict[str, Any]:
        return {"version": self.version, "ladders": copy.deepcopy(self._ladders)}

    def __eq__(self, other: object) -> bool:
        return isinstance(other, LadderTable) and self.to_json() == other.to_json()

    def __repr__(self) -> str:
        return f"LadderTable(version={self.version!r})"


def _check_ladder(kind: str, records: list[dict[str, Any]]) -> None:
    if len(records) != N_LEVELS:
        raise InvalidConfiguration(f"{kind}: ladder needs {N_LEVELS} records, got {len(records)}")
    default_keys = set(DEFAULT_LADDERS[kind][0])
    key, direction = SEVERITY_KEY[kind]
    for rec in records:
        if set(rec) != default_keys:
            raise InvalidConfiguration(
                f"{kind}: record keys {sorted(rec)} differ from {sorted(default_keys)}"
            )
    values = [direction * rec[key] for rec in records]
    if any(b <= a for a, b in zip(values, values[1:])):
        raise InvalidConfiguration(f"{kind}: {key!r} ladder is not strictly monotone in severity")


DEFAULT_TABLE = LadderTable(DEFAULT_LADDERS)


def load_ladders(path: str | Path | None = None) -> LadderTable:
    """Load an override file on top of the shipped table.

    With no ``path`` the ``DEGRADEIQA_LADDERS`` environment variable is
    consulted; if unset the shipped table is returned.
    """
    if path is None:
        path = os.environ.get(LADDER_ENV_VAR) or None
    if path is None:
        return DEFAULT_TABLE
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidConfiguration(f"cannot read ladder file {path}: {exc}") from exc
    try:
        jsonschema.validate(doc, LADDER_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise InvalidConfiguration(f"ladder file {path}: {exc.message}") from exc
    merged = copy.deepcopy(DEFAULT_LADDERS)
    merged.update(doc["ladders"])
    return LadderTable(merged, version=doc.get("version", f"{LADDER_VERSION}+override"))


def severity_ladder(kind: str, table: LadderTable | None = None) -> list[dict[str, Any]]:
    group_of(kind)
    return (table or DEFAULT_TABLE)[kind]
