"""Threshold classification over perplexity scores.

The decision rule is fixed: perplexity strictly below the threshold means
Supported, anything at or above it means Unsupported.  Fitting picks the
threshold that maximizes an objective (macro F1 by default) over a handful
of labeled shots.

Exact search considers every decision boundary the shots can induce:
midpoints between consecutive distinct perplexities, plus one candidate
below the minimum and one above the maximum (offset by 1e-6 scaled to the
extreme's magnitude) for the two degenerate labelings.  Grid search sweeps
an inclusive lo..hi range by a fixed step instead.  Both run on sorted
prefix counts, so fitting is O(n log n + candidates * log n).

A fitted classifier remembers the provenance hash of the scores it was
fitted on and refuses to predict against scores with a different one.
"""

from __future__ import annotations

import bisect
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .data import VeracityLabel
from .errors import InputError, ParseError, ProvenanceError, ValidationError
from .metrics import objective_values

OBJECTIVES = ("f1_macro", "accuracy")

_FORMAT = "pplcheck-threshold"
_VERSION = 1


@dataclass(frozen=True)
class GridSearch:
    """Inclusive lo..hi sweep by step.  The usual coarse sweep is
    GridSearch(0.0, 1000.0, 1.0)."""

    lo: float
    hi: float
    step: float

    def __post_init__(self):
        if not (self.step > 0):
            raise ValidationError(f"step must be > 0, got {self.step}")
        if self.hi < self.lo:
            raise ValidationError(f"hi {self.hi} < lo {self.lo}")

    def candidates(self) -> list[float]:
        out = []
        k = 0
        while True:
            value = self.lo + k * self.step
            if value > self.hi + 1e-12:
                break
            out.append(value)
            k += 1
        return out

    def to_json_dict(self) -> dict:
        return {"kind": "grid", "lo": self.lo, "hi": self.hi, "step": self.step}


@dataclass(frozen=True)
class FitReport:
    objective: str
    objective_value: float
    secondary: str
    secondary_value: float
    shot_count: int
    seed: int | None = None

    def to_json_dict(self) -> dict:
        return {
            "objective": self.objective,
            "objective_value": self.objective_value,
            "secondary": self.secondary,
            "secondary_value": self.secondary_value,
            "shot_count": self.shot_count,
            "seed": self.seed,
        }


def exact_candidates(perplexities: Sequence[float]) -> list[float]:
    """Candidate thresholds covering every labeling the scores can induce."""
    distinct = sorted(set(perplexities))
    if not distinct:
        raise ValidationError("no perplexities to fit on")
    eps_lo = 1e-6 * max(1.0, abs(distinct[0]))
    eps_hi = 1e-6 * max(1.0, abs(distinct[-1]))
    mids = [(a + b) / 2.0 for a, b in zip(distinct, distinct[1:])]
    return [distinct[0] - eps_lo] + mids + [distinct[-1] + eps_hi]


def _evaluate_cuts(
    pairs: Sequence[tuple[float, VeracityLabel]],
    candidates: Sequence[float],
    objective: str,
    secondary: str,
) -> tuple[float, float, float]:
    """Pick the best candidate threshold; returns (th, obj, sec).

    Ties prefer the higher secondary metric, then the smaller threshold
    (candidates must be passed in ascending order).
    """
    ordered = sorted(pairs, key=lambda p: p[0])
    distinct: list[float] = []
    # prefix[i] = (#Supported, #Unsupported) among scores < distinct[i]
    sup_prefix = [0]
    unsup_prefix = [0]
    for ppl, label in ordered:
        if not distinct or ppl != distinct[-1]:
            distinct.append(ppl)
            sup_prefix.append(sup_prefix[-1])
            unsup_prefix.append(unsup_prefix[-1])
        sup_prefix[-1] += label is VeracityLabel.SUPPORTED
        unsup_prefix[-1] += label is VeracityLabel.UNSUPPORTED
    total_sup = sup_prefix[-1]
    total_unsup = unsup_prefix[-1]

    best: tuple[float, float, float] | None = None
    for th in candidates:
        cut = bisect.bisect_left(distinct, th)
        # Predicted Supported: everything strictly below th.
        tn_u, fn_u = sup_prefix[cut], unsup_prefix[cut]
        fp_u, tp_u = total_sup - tn_u, total_unsup - fn_u
        values = objective_values(tp_u=tp_u, fp_u=fp_u, fn_u=fn_u, tn_u=tn_u)
        obj, sec = values[objective], values[secondary]
        if best is None or obj > best[1] or (obj == best[1] and sec > best[2]):
            best = (th, obj, sec)
    assert best is not None
    return best


@dataclass(frozen=True)
class ThresholdClassifier:
    threshold: float
    objective: str
    search: dict
    fit_report: FitReport
    provenance_hash: str | None = None

    def _check_provenance(self, provenance_hash: str | None) -> None:
        if self.provenance_hash != provenance_hash:
            raise ProvenanceError(
                f"classifier fitted on provenance {self.provenance_hash!r} cannot"
                f" score provenance {provenance_hash!r}"
            )

    def predict_one(self, perplexity: float) -> VeracityLabel:
        if not math.isfinite(perplexity):
            raise ValidationError(f"bad perplexity {perplexity!r}")
        return (
            VeracityLabel.SUPPORTED
            if perplexity < self.threshold
            else VeracityLabel.UNSUPPORTED
        )

    def predict(
        self,
        perplexities: Sequence[float],
        provenance_hash: str | None = None,
    ) -> list[VeracityLabel]:
        self._check_provenance(provenance_hash)
        return [self.predict_one(p) for p in perplexities]

    def to_json_dict(self) -> dict:
        return {
            "format": _FORMAT,
            "version": _VERSION,
            "threshold": self.threshold,
            "objective": self.objective,
            "search": self.search,
            "fit_report": self.fit_report.to_json_dict(),
            "provenance_hash": self.provenance_hash,
        }

    def save(self, path: str | Path) -> None:
        try:
            Path(path).write_text(
                json.dumps(self.to_json_dict(), indent=2, sort_keys=True) + "\n",
                encoding="utf-8",
            )
        except OSError as exc:
            raise InputError(f"cannot write classifier {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "ThresholdClassifier":
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise InputError(f"cannot read classifier {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(str(path), exc.lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(payload, dict) or payload.get("format") != _FORMAT:
            raise ParseError(str(path), 1, f"not a {_FORMAT} file")
        if payload.get("version") != _VERSION:
            raise ParseError(str(path), 1, f"unsupported version {payload.get('version')!r}")
        try:
            report = FitReport(**payload["fit_report"])
            return cls(
                threshold=float(payload["threshold"]),
                objective=str(payload["objective"]),
                search=dict(payload["search"]),
                fit_report=report,
                provenance_hash=payload.get("provenance_hash"),
            )
        except (KeyError, TypeError) as exc:
            raise ParseError(str(path), 1, f"malformed classifier payload: {exc}") from exc


def fit_threshold(
    pairs: Sequence[tuple[float, VeracityLabel]],
    objective: str = "f1_macro",
    grid: GridSearch | None = None,
    seed: int | None = None,
    provenance_hash: str | None = None,
) -> ThresholdClassifier:
    """Fit the decision threshold on (perplexity, gold label) shots."""
    if objective not in OBJECTIVES:
        raise ValidationError(f"unknown objective {objective!r}; expected one of {OBJECTIVES}")
    if not pairs:
        raise ValidationError("cannot fit a threshold on zero shots")
    for ppl, _ in pairs:
        if not math.isfinite(ppl) or ppl <= 0:
            raise ValidationError(f"bad perplexity {ppl!r} in shots")

    secondary = "accuracy" if objective == "f1_macro" else "f1_macro"
    if grid is None:
        candidates = exact_candidates([p for p, _ in pairs])
        search = {"kind": "exact"}
    else:
        candidates = grid.candidates()
        search = grid.to_json_dict()

    th, obj, sec = _evaluate_cuts(pairs, candidates, objective, secondary)
    report = FitReport(
        objective=objective,
        objective_value=obj,
        secondary=secondary,
        secondary_value=sec,
        shot_count=len(pairs),
        seed=seed,
    )
    return ThresholdClassifier(
        threshold=th,
        objective=objective,
        search=search,
        fit_report=report,
        provenance_hash=provenance_hash,
    )


@dataclass(frozen=True)
class MajorityBaseline:
    """Predicts the most frequent shot label; ties go to Unsupported."""

    label: VeracityLabel
    shot_count: int

    @classmethod
    def fit(cls, labels: Sequence[VeracityLabel]) -> "MajorityBaseline":
        if not labels:
            raise ValidationError("cannot fit a baseline on zero shots")
        sup = sum(lab is VeracityLabel.SUPPORTED for lab in labels)
        unsup = len(labels) - sup
        majority = VeracityLabel.SUPPORTED if sup > unsup else VeracityLabel.UNSUPPORTED
        return cls(label=majority, shot_count=len(labels))

    def predict(self, n: int) -> list[VeracityLabel]:
        return [self.label] * n
