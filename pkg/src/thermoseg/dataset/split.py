"""Deterministic train/val/test splitting and k-fold assignment.

A split plan is a pure function of (sorted ids, seed, ratios, folds): ids
are shuffled once with a seeded generator, apportioned to train/val/test
by largest remainder so the sizes are as close to the ratios as integer
counts allow, and the training ids are then dealt into contiguous folds.
The plan serializes to a TSV of `id<TAB>split<TAB>fold` lines so a split
can be pinned in version control and reloaded bit-identically.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError, StoreError

DEFAULT_RATIOS = (0.8, 0.1, 0.1)
DEFAULT_FOLDS = 5
_SPLITS = ("train", "val", "test")


def _apportion(total: int, ratios: tuple[float, float, float]) -> list[int]:
    """Integer counts summing to `total`, via largest remainder.

    Ties in the fractional part are broken in favor of earlier entries
    (train before val before test), which keeps the result deterministic.
    """
    exact = [total * r for r in ratios]
    counts = [int(x) for x in exact]
    short = total - sum(counts)
    order = sorted(range(len(ratios)),
                   key=lambda i: (-(exact[i] - counts[i]), i))
    for i in order[:short]:
        counts[i] += 1
    return counts


@dataclass
class SplitPlan:
    """Assignment of sequence ids to train/val/test and train folds."""

    assignments: dict[str, str]
    folds: dict[str, int]
    seed: int = 0
    n_folds: int = DEFAULT_FOLDS

    def __post_init__(self) -> None:
        for sid, split in self.assignments.items():
            if split not in _SPLITS:
                raise ConfigurationError(f"{sid}: unknown split {split!r}")
        for sid, fold in self.folds.items():
            if self.assignments.get(sid) != "train":
                raise ConfigurationError(f"{sid}: fold assigned outside train")
            if not 0 <= fold < self.n_folds:
                raise ConfigurationError(f"{sid}: fold {fold} outside 0..{self.n_folds - 1}")

    def ids(self, split: str) -> list[str]:
        if split not in _SPLITS:
            raise ConfigurationError(f"unknown split {split!r}")
        return sorted(s for s, v in self.assignments.items() if v == split)

    def fold_ids(self, fold: int, held_out: bool = True) -> list[str]:
        """Training ids inside (held_out) or outside the given fold."""
        if not 0 <= fold < self.n_folds:
            raise ConfigurationError(f"fold {fold} outside 0..{self.n_folds - 1}")
        if held_out:
            return sorted(s for s, v in self.folds.items() if v == fold)
        return sorted(s for s, v in self.folds.items() if v != fold)

    def save(self, path: str | Path) -> None:
        lines = []
        for sid in sorted(self.assignments):
            split = self.assignments[sid]
            fold = self.folds.get(sid, -1)
            lines.append(f"{sid}\t{split}\t{fold}")
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path, seed: int = 0,
             n_folds: int = DEFAULT_FOLDS) -> "SplitPlan":
        assignments: dict[str, str] = {}
        folds: dict[str, int] = {}
        for ln, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise StoreError(f"{path}:{ln}: expected id<TAB>split<TAB>fold")
            sid, split, fold = parts
            if sid in assignments:
                raise StoreError(f"{path}:{ln}: duplicate id {sid!r}")
            assignments[sid] = split
            if int(fold) >= 0:
                folds[sid] = int(fold)
        return cls(assignments=assignments, folds=folds, seed=seed, n_folds=n_folds)


def split_dataset(ids: list[str], seed: int = 0,
                  ratios: tuple[float, float, float] = DEFAULT_RATIOS,
                  ) -> dict[str, list[str]]:
    """Shuffle ids with `seed` and cut into train/val/test by `ratios`."""
    if len(set(ids)) != len(ids):
        raise ConfigurationError("duplicate ids in dataset")
    if any(r < 0 for r in ratios) or abs(sum(ratios) - 1.0) > 1e-9:
        raise ConfigurationError("ratios must be non-negative and sum to 1")
    ordered = sorted(ids)
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(ordered))
    shuffled = [ordered[i] for i in perm]
    n_train, n_val, _ = _apportion(len(ordered), ratios)
    return {
        "train": shuffled[:n_train],
        "val": shuffled[n_train:n_train + n_val],
        "test": shuffled[n_train + n_val:],
    }


def kfold(ids: list[str], n_folds: int = DEFAULT_FOLDS) -> dict[str, int]:
    """Deal already-shuffled ids into `n_folds` contiguous chunks.

    Chunk sizes differ by at most one, with earlier folds taking the
    extra items, so every id lands in exactly one fold.
    """
    if n_folds < 1:
        raise ConfigurationError("n_folds must be >= 1")
    n = len(ids)
    base, extra = divmod(n, n_folds)
    out: dict[str, int] = {}
    pos = 0
    for fold in range(n_folds):
        size = base + (1 if fold < extra else 0)
        for sid in ids[pos:pos + size]:
            out[sid] = fold
        pos += size
    return out


def build_plan(ids: list[str], seed: int = 0,
               ratios: tuple[float, float, float] = DEFAULT_RATIOS,
               n_folds: int = DEFAULT_FOLDS) -> SplitPlan:
    """Full plan: shuffle, apportion, and fold the training portion."""
    groups = split_dataset(ids, seed=seed, ratios=ratios)
    assignments = {sid: split for split, members in groups.items() for sid in members}
    folds = kfold(groups["train"], n_folds=n_folds)
    return SplitPlan(assignments=assignments, folds=folds, seed=seed, n_folds=n_folds)
