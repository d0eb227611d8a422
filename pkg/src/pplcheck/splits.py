"""Seeded few-shot splits.

A split permutes the input order with a deterministic seeded shuffle and
takes the first n items as labeled shots, the remainder as the test
portion.  The same (order, n_shots, seed) always yields the same split,
independent of platform or process.  Splits are defined over (id, label)
pairs so they work identically on datasets and on persisted score rows.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .data import ClaimRecord, Dataset, VeracityLabel
from .errors import ValidationError
from .rng import Splitmix64


@dataclass(frozen=True)
class FewShotSplit:
    seed: int
    n_shots: int
    stratified: bool
    shot_ids: tuple[str, ...]
    test_ids: tuple[str, ...]


def split_pairs(
    pairs: Sequence[tuple[str, VeracityLabel]],
    n_shots: int,
    seed: int,
    stratified: bool = False,
) -> FewShotSplit:
    """Shuffle-and-cut split; with `stratified`, a shot set that collapsed
    to a single class gets its last shot swapped for the earliest
    test-side item of the missing class (needs n_shots >= 2)."""
    n = len(pairs)
    if not 1 <= n_shots < n:
        raise ValidationError(f"n_shots must satisfy 1 <= n_shots < {n}, got {n_shots}")
    indices = list(range(n))
    Splitmix64(seed).shuffle(indices)
    shots = indices[:n_shots]
    test = indices[n_shots:]

    if stratified and n_shots >= 2:
        labels = {pairs[i][1] for i in shots}
        if len(labels) == 1:
            missing = next(iter(labels)).flipped()
            for j, idx in enumerate(test):
                if pairs[idx][1] is missing:
                    shots[-1], test[j] = test[j], shots[-1]
                    break

    return FewShotSplit(
        seed=seed,
        n_shots=n_shots,
        stratified=stratified,
        shot_ids=tuple(pairs[i][0] for i in shots),
        test_ids=tuple(pairs[i][0] for i in test),
    )


def make_split(
    dataset: Dataset,
    n_shots: int,
    seed: int,
    stratified: bool = False,
) -> FewShotSplit:
    return split_pairs(
        [(rec.id, rec.label) for rec in dataset.records], n_shots, seed, stratified
    )


def split_records(
    dataset: Dataset, split: FewShotSplit
) -> tuple[list[ClaimRecord], list[ClaimRecord]]:
    index = dataset.by_id()
    try:
        shots = [index[i] for i in split.shot_ids]
        test = [index[i] for i in split.test_ids]
    except KeyError as exc:
        raise ValidationError(f"split references unknown record id {exc.args[0]!r}") from exc
    return shots, test
