"""Random ordered distortion compositions.

A composition picks ``n`` distinct groups (``n`` uniform in ``1..n_dist_max``),
one kind per group, a random order, and a Gaussian-sampled level per step.
It is applied to an image with probability ``1 - p_prist``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .distortions import (
    DEFAULT_TABLE,
    GROUP_NAMES,
    GROUPS,
    N_LEVELS,
    LadderTable,
    apply_distortion,
    check_level,
    group_of,
)
from .errors import InvalidArgument, InvalidConfiguration

__all__ = [
    "PRISTINE",
    "Composition",
    "DegradeConfig",
    "Step",
    "apply_composition",
    "count_compositions",
    "enumerate_compositions",
    "image_seed",
    "level_from_normal",
    "make_rng",
    "maybe_degrade",
    "sample_composition",
    "sample_level",
]


@dataclass(frozen=True)
class Step:
    kind: str
    level: int

    @property
    def group(self) -> str:
        return group_of(self.kind)


@dataclass(frozen=True)
class Composition:
    steps: tuple[Step, ...]

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def validate(self, n_dist_max: int = len(GROUP_NAMES)) -> "Composition":
        if not 1 <= len(self.steps) <= n_dist_max:
            raise InvalidArgument(f"composition length {len(self.steps)} not in [1, {n_dist_max}]")
        groups = [group_of(s.kind) for s in self.steps]
        if len(set(groups)) != len(groups):
            raise InvalidArgument(f"composition repeats a group: {groups}")
        for s in self.steps:
            check_level(s.level)
        return self

    @classmethod
    def of(cls, *pairs: tuple[str, int]) -> "Composition":
        return cls(tuple(Step(k, int(lv)) for k, lv in pairs))


class _Pristine:
    """Marker returned by :func:`maybe_degrade` when the image is left untouched."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "PRISTINE"

    def __reduce__(self):
        return (_Pristine, ())


PRISTINE = _Pristine()


@dataclass(frozen=True)
class DegradeConfig:
    n_dist_max: int = 4
    p_prist: float = 0.05
    sigma: float = 2.5
    excluded_kinds: frozenset[str] = field(default_factory=frozenset)
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "excluded_kinds", frozenset(self.excluded_kinds))
        if not 1 <= self.n_dist_max <= len(GROUP_NAMES):
            raise InvalidConfiguration(f"n_dist_max must be in [1, 7], got {self.n_dist_max}")
        if not 0.0 <= self.p_prist <= 1.0:
            raise InvalidConfiguration(f"p_prist must be in [0, 1], got {self.p_prist}")
        if not self.sigma > 0:
            raise InvalidConfiguration(f"sigma must be positive, got {self.sigma}")
        if not 0 <= self.master_seed < 2**64:
            raise InvalidConfiguration("master_seed must be a 64-bit unsigned integer")
        for k in self.excluded_kinds:
            group_of(k)

    def available_groups(self) -> list[tuple[str, tuple[str, ...]]]:
        out = []
        for g in GROUP_NAMES:
            kinds = tuple(k for k in GROUPS[g] if k not in self.excluded_kinds)
            if kinds:
                out.append((g, kinds))
        return out


# -- rng streams -------------------------------------------------------------


def image_seed(master_seed: int, index: int) -> int:
    """64-bit per-image seed hashed from ``(master_seed, index)``."""
    ss = np.random.SeedSequence([int(master_seed), int(index)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed)))


# -- sampling ----------------------------------------------------------------


def level_from_normal(z: float, sigma: float) -> int:
    """Map a standard normal draw to a level: ``clamp(ceil(|sigma z|), 1, 5)``."""
    return min(N_LEVELS, max(1, math.ceil(abs(sigma * z))))


def sample_level(sigma: float, rng: np.random.Generator) -> int:
    if not sigma > 0:
        raise InvalidArgument("sigma must be positive")
    return level_from_normal(rng.standard_normal(), sigma)


def sample_composition(config: DegradeConfig, rng: np.random.Generator) -> Composition:
    """Draw one composition.

    Every call consumes a fixed block of draws (``1 + 2 * n_groups`` uniforms
    and ``n_dist_max`` normals) regardless of the outcome.
    """
    groups = config.available_groups()
    if not groups:
        raise InvalidConfiguration("every distortion kind is excluded")
    n_avail = len(groups)
    u = rng.random(1 + 2 * n_avail)
    z = rng.standard_normal(config.n_dist_max)
    n = 1 + int(u[0] * min(config.n_dist_max, n_avail))
    # partial Fisher-Yates: a uniform ordered n-subset of the groups
    order = list(range(n_avail))
    for t in range(n):
        j = t + int(u[1 + t] * (n_avail - t))
        order[t], order[j] = order[j], order[t]
    steps = []
    for t in range(n):
        _, kinds = groups[order[t]]
        kind = kinds[int(u[1 + n_avail + t] * len(kinds))]
        steps.append(Step(kind, level_from_normal(z[t], config.sigma)))
    return Composition(tuple(steps))


def apply_composition(
    img: np.ndarray,
    comp: Composition,
    rng: np.random.Generator,
    ladders: LadderTable | None = None,
) -> np.ndarray:
    """Apply the steps left to right, sharing ``rng`` in step order."""
    out = np.asarray(img)
    for step in comp.steps:
        out = apply_distortion(out, step.kind, step.level, rng, ladders)
    return out


def maybe_degrade(
    img: np.ndarray,
    config: DegradeConfig,
    rng: np.random.Generator,
    ladders: LadderTable | None = None,
):
    """Return ``(image, composition)`` or ``(image, PRISTINE)`` with probability ``p_prist``."""
    if rng.random() < config.p_prist:
        return np.asarray(img), PRISTINE
    comp = sample_composition(config, rng)
    return apply_composition(img, comp, rng, ladders), comp


# -- counting ----------------------------------------------------------------


def _check_count_args(group_sizes: Sequence[int], levels: int, n_dist_max: int) -> list[int]:
    sizes = [int(s) for s in group_sizes]
    if not sizes or any(s < 0 for s in sizes):
        raise InvalidArgument("group sizes must be a non-empty list of non-negative integers")
    if levels < 1:
        raise InvalidArgument("levels must be >= 1")
    if not 1 <= n_dist_max <= len(sizes):
        raise InvalidArgument(f"n_dist_max must be in [1, {len(sizes)}]")
    return sizes


def elementary_symmetric(values: Iterable[int]) -> list[int]:
    """Coefficients ``e_0..e_n`` of ``prod(1 + v x)``."""
    coeffs = [1]
    for v in values:
        nxt = coeffs + [0]
        for m in range(len(coeffs), 0, -1):
            nxt[m] += v * coeffs[m - 1]
        coeffs = nxt
    return coeffs


def count_compositions(
    group_sizes: Sequence[int] = (3, 3, 5, 4, 4, 2, 3),
    levels: int = N_LEVELS,
    n_dist_max: int = 4,
    mode: str = "literal",
) -> int:
    """Number of distinct compositions.

    ``literal`` evaluates the nested-sum expression term by term: for each
    length ``m`` the bracket is the product of ``m`` independent sums, the
    ``t``-th running over groups ``t..G``.  ``distinct_groups`` counts ordered
    sequences of distinct groups exactly: ``sum_m m! L^m e_m(sizes)``.
    """
    sizes = _check_count_args(group_sizes, levels, n_dist_max)
    if mode == "literal":
        total = 0
        for m in range(1, n_dist_max + 1):
            bracket = 1
            for t in range(m):
                bracket *= sum(sizes[t:])
            total += math.factorial(m) * levels**m * bracket
        return total
    if mode == "distinct_groups":
        e = elementary_symmetric(sizes)
        return sum(
            math.factorial(m) * levels**m * e[m] for m in range(1, n_dist_max + 1)
        )
    raise InvalidArgument(f"unknown count mode {mode!r}")


def enumerate_compositions(group_sizes: Sequence[int], levels: int, n_dist_max: int):
    """Yield every composition as a tuple of ``(group, member, level)`` triples."""
    sizes = _check_count_args(group_sizes, levels, n_dist_max)
    groups = range(len(sizes))

    def expand(seq):
        if not seq:
            yield ()
            return
        g = seq[0]
        for rest in expand(seq[1:]):
            for j in range(sizes[g]):
                for lv in range(1, levels + 1):
                    yield ((g, j, lv),) + rest

    for m in range(1, n_dist_max + 1):
        for seq in permutations(groups, m):
            yield from expand(seq)
