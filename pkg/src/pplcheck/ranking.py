"""Perplexity ranking for review triage.

Ranks claims most-suspicious-first (perplexity descending, ties broken by
record id ascending) and reports precision at k: the fraction of the top
k that are gold Unsupported.  A seeded random-permutation baseline gives
the number to beat; its expectation is the Unsupported class prior.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .data import VeracityLabel
from .errors import ValidationError
from .rng import Splitmix64

RankItem = tuple[str, VeracityLabel, float]


def as_rank_items(objs: Sequence) -> list[RankItem]:
    """Adapt scored claims or score rows to (id, label, perplexity)."""
    items: list[RankItem] = []
    for obj in objs:
        if hasattr(obj, "record"):
            items.append((obj.record.id, obj.record.label, obj.perplexity))
        else:
            items.append((obj.id, obj.label, obj.perplexity))
    return items


@dataclass(frozen=True)
class RankingReport:
    n: int
    unsupported_total: int
    precision_at: dict[int, float]
    baseline_at: dict[int, float]
    baseline_trials: int
    seed: int
    ranked_ids: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "unsupported_total": self.unsupported_total,
            "precision_at": {str(k): v for k, v in self.precision_at.items()},
            "baseline_at": {str(k): v for k, v in self.baseline_at.items()},
            "baseline_trials": self.baseline_trials,
            "seed": self.seed,
            "ranked_ids": list(self.ranked_ids),
        }


def _precision_prefix(labels: Sequence[VeracityLabel]) -> list[int]:
    """prefix[k] = number of Unsupported among the first k."""
    prefix = [0]
    for label in labels:
        prefix.append(prefix[-1] + (label is VeracityLabel.UNSUPPORTED))
    return prefix


def rank_claims(
    items: Sequence[RankItem],
    ks: Sequence[int],
    baseline_trials: int = 10,
    seed: int = 13,
) -> RankingReport:
    if not items:
        raise ValidationError("cannot rank zero claims")
    if baseline_trials < 1:
        raise ValidationError(f"baseline_trials must be >= 1, got {baseline_trials}")
    n = len(items)
    ks = sorted(set(int(k) for k in ks))
    for k in ks:
        if not 1 <= k <= n:
            raise ValidationError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if not ks:
        raise ValidationError("need at least one k")
    seen = set()
    for item_id, _, ppl in items:
        if item_id in seen:
            raise ValidationError(f"duplicate id {item_id!r} in ranking input")
        seen.add(item_id)
        if not math.isfinite(ppl):
            raise ValidationError(f"bad perplexity {ppl!r} for id {item_id!r}")

    ranked = sorted(items, key=lambda it: (-it[2], it[0]))
    prefix = _precision_prefix([label for _, label, _ in ranked])
    precision_at = {k: prefix[k] / k for k in ks}

    rng = Splitmix64(seed)
    sums = {k: 0.0 for k in ks}
    for _ in range(baseline_trials):
        draws = [rng.next_float() for _ in range(n)]
        order = sorted(range(n), key=lambda i: (-draws[i], items[i][0]))
        trial_prefix = _precision_prefix([items[i][1] for i in order])
        for k in ks:
            sums[k] += trial_prefix[k] / k
    baseline_at = {k: sums[k] / baseline_trials for k in ks}

    return RankingReport(
        n=n,
        unsupported_total=prefix[-1],
        precision_at=precision_at,
        baseline_at=baseline_at,
        baseline_trials=baseline_trials,
        seed=seed,
        ranked_ids=tuple(item_id for item_id, _, _ in ranked),
    )
