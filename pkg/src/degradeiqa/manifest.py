"""JSON Lines manifest: one record per degraded output image."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable

from .degradation import PRISTINE, Composition, Step
from .distortions import DEFAULT_TABLE, LadderTable, group_of
from .errors import InvalidArgument


@dataclass(frozen=True)
class StepRecord:
    kind: str
    group: str
    level: int
    params: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class ManifestRecord:
    source_path: str
    output_path: str
    seed: int
    pristine: bool
    steps: tuple[StepRecord, ...] = ()
    index: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        if self.pristine and self.steps:
            raise InvalidArgument("a pristine record cannot carry steps")
        if not self.pristine and not self.steps:
            raise InvalidArgument("a degraded record needs at least one step")

    @classmethod
    def from_outcome(
        cls,
        source_path: str,
        output_path: str,
        seed: int,
        outcome,
        ladders: LadderTable | None = None,
        index: int | None = None,
    ) -> "ManifestRecord":
        table = ladders or DEFAULT_TABLE
        if outcome is PRISTINE:
            return cls(source_path, output_path, seed, True, (), index)
        steps = tuple(
            StepRecord(s.kind, s.group, s.level, table.params(s.kind, s.level)) for s in outcome
        )
        return cls(source_path, output_path, seed, False, steps, index)

    def composition(self):
        """The recorded composition, or :data:`PRISTINE`."""
        if self.pristine:
            return PRISTINE
        return Composition(tuple(Step(s.kind, s.level) for s in self.steps))

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "source_path": self.source_path,
            "output_path": self.output_path,
            "seed": self.seed,
            "pristine": self.pristine,
            "steps": [
                {"kind": s.kind, "group": s.group, "level": s.level, "params": dict(s.params)}
                for s in self.steps
            ],
        }
        if self.index is not None:
            d["index"] = self.index
        return d

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ManifestRecord":
        try:
            steps = []
            for s in d["steps"]:
                if group_of(s["kind"]) != s["group"]:
                    raise InvalidArgument(f"kind {s['kind']!r} is not in group {s['group']!r}")
                steps.append(StepRecord(s["kind"], s["group"], int(s["level"]), dict(s["params"])))
            return cls(
                source_path=d["source_path"],
                output_path=d["output_path"],
                seed=int(d["seed"]),
                pristine=bool(d["pristine"]),
                steps=tuple(steps),
                index=d.get("index"),
            )
        except KeyError as exc:
            raise InvalidArgument(f"manifest record missing field {exc}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def write_manifest(path: str | Path, records: Iterable[ManifestRecord]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_manifest(path: str | Path) -> list[ManifestRecord]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                out.append(ManifestRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise InvalidArgument(f"{path}:{lineno}: invalid JSON: {exc}") from None
    return out
