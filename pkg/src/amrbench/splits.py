"""Dataset partitioning: random split grouped by stay, and temporal split.

All rows of one patient-unit stay always land in the same fold, which keeps
within-stay information out of the evaluation folds.
"""
from __future__ import annotations

import csv
import enum
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, SplitError


class Fold(enum.IntEnum):
    TRAIN = 0
    VALIDATION = 1
    TEST = 2


class SplitMode(enum.Enum):
    RANDOM_BY_STAY = "random"
    TEMPORAL_BY_YEAR = "temporal"


@dataclass(frozen=True)
class SplitSpec:
    mode: SplitMode
    seed: int
    fractions: tuple[float, float, float] = (0.6, 0.2, 0.2)
    cutoff_year: Optional[int] = None

    def __post_init__(self):
        if abs(sum(self.fractions) - 1.0) > 1e-9:
            raise ConfigError(f"split fractions must sum to 1, got {self.fractions}")
        if any(f <= 0 for f in self.fractions):
            raise ConfigError(f"split fractions must be positive, got {self.fractions}")
        if self.mode is SplitMode.TEMPORAL_BY_YEAR and self.cutoff_year is None:
            raise ConfigError("temporal split requires cutoff_year")


@dataclass
class SplitAssignment:
    fold_of_row: np.ndarray  # Fold value per row

    def indices(self, fold: Fold) -> np.ndarray:
        return np.flatnonzero(self.fold_of_row == int(fold))

    def export(self, test_ids: Sequence[str], path: str | Path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="\n") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["test_id", "fold"])
            for test_id, fold in zip(test_ids, self.fold_of_row):
                writer.writerow([test_id, Fold(fold).name.lower()])


def largest_remainder_allocation(total: int, fractions: Sequence[float]) -> list[int]:
    """Integer allocation closest to exact fractions; remainders win ties in
    listed order so the result is deterministic."""
    exact = [total * f for f in fractions]
    base = [int(np.floor(e)) for e in exact]
    leftover = total - sum(base)
    remainders = sorted(
        range(len(fractions)), key=lambda i: (-(exact[i] - base[i]), i)
    )
    for i in remainders[:leftover]:
        base[i] += 1
    return base


def _unique_stays_in_order(group_ids: Sequence[str]) -> list[str]:
    seen: set[str] = set()
    stays = []
    for gid in group_ids:
        if gid not in seen:
            seen.add(gid)
            stays.append(gid)
    return stays


def split_random_by_stay(matrix, spec: SplitSpec) -> SplitAssignment:
    """Shuffle unique stay ids with the spec seed and allocate 60/20/20 by
    stay count; each test inherits its stay's fold."""
    if spec.mode is not SplitMode.RANDOM_BY_STAY:
        raise ConfigError(f"split_random_by_stay called with mode {spec.mode}")
    stays = _unique_stays_in_order(matrix.group_ids)
    if len(stays) < 3:
        raise SplitError(f"need at least 3 distinct stays to split, got {len(stays)}")
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(stays))
    shuffled = [stays[i] for i in order]
    n_train, n_val, n_test = largest_remainder_allocation(len(stays), spec.fractions)
    fold_of_stay: dict[str, int] = {}
    for stay in shuffled[:n_train]:
        fold_of_stay[stay] = int(Fold.TRAIN)
    for stay in shuffled[n_train:n_train + n_val]:
        fold_of_stay[stay] = int(Fold.VALIDATION)
    for stay in shuffled[n_train + n_val:]:
        fold_of_stay[stay] = int(Fold.TEST)
    fold_of_row = np.array([fold_of_stay[gid] for gid in matrix.group_ids], dtype=np.int8)
    return SplitAssignment(fold_of_row=fold_of_row)


def split_temporal(matrix, spec: SplitSpec) -> SplitAssignment:
    """Stays admitted before the cutoff year form train+validation (validation
    is a random quarter of them, preserving the overall 60/20 proportion);
    stays at or after the cutoff form the test fold."""
    if spec.mode is not SplitMode.TEMPORAL_BY_YEAR:
        raise ConfigError(f"split_temporal called with mode {spec.mode}")
    stays = _unique_stays_in_order(matrix.group_ids)
    if len(stays) < 3:
        raise SplitError(f"need at least 3 distinct stays to split, got {len(stays)}")
    year_of_stay: dict[str, int] = {}
    for gid, year in zip(matrix.group_ids, matrix.admit_years):
        year_of_stay.setdefault(gid, int(year))

    pre = [s for s in stays if year_of_stay[s] < spec.cutoff_year]
    post = [s for s in stays if year_of_stay[s] >= spec.cutoff_year]
    if not pre or not post:
        raise SplitError(
            f"cutoff year {spec.cutoff_year} leaves {len(pre)} pre-cutoff and "
            f"{len(post)} post-cutoff stays"
        )

    train_frac = spec.fractions[0] / (spec.fractions[0] + spec.fractions[1])
    n_train, n_val = largest_remainder_allocation(len(pre), [train_frac, 1.0 - train_frac])
    rng = np.random.default_rng(spec.seed)
    order = rng.permutation(len(pre))
    shuffled = [pre[i] for i in order]
    fold_of_stay = {stay: int(Fold.TEST) for stay in post}
    for stay in shuffled[:n_train]:
        fold_of_stay[stay] = int(Fold.TRAIN)
    for stay in shuffled[n_train:]:
        fold_of_stay[stay] = int(Fold.VALIDATION)
    fold_of_row = np.array([fold_of_stay[gid] for gid in matrix.group_ids], dtype=np.int8)
    return SplitAssignment(fold_of_row=fold_of_row)


def make_split(matrix, spec: SplitSpec) -> SplitAssignment:
    if spec.mode is SplitMode.RANDOM_BY_STAY:
        return split_random_by_stay(matrix, spec)
    return split_temporal(matrix, spec)
