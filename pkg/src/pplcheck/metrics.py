"""Binary classification metrics.

Accuracy, per-class precision/recall/F1, and macro F1 (unweighted mean of
the two per-class F1 scores).  Zero denominators yield 0.0 rather than
raising, so degenerate predictions still produce a report.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .data import VeracityLabel
from .errors import ValidationError

_LABELS = (VeracityLabel.SUPPORTED, VeracityLabel.UNSUPPORTED)


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def _prf(tp: int, fp: int, fn: int) -> tuple[float, float, float]:
    precision = _safe_div(tp, tp + fp)
    recall = _safe_div(tp, tp + fn)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return precision, recall, f1


def objective_values(tp_u: int, fp_u: int, fn_u: int, tn_u: int) -> dict[str, float]:
    """Accuracy and macro F1 from Unsupported-as-positive confusion counts.

    Shared by threshold fitting, which sweeps these four counts directly.
    """
    n = tp_u + fp_u + fn_u + tn_u
    _, _, f1_u = _prf(tp_u, fp_u, fn_u)
    # For the Supported class the roles swap: tn_u are its true positives.
    _, _, f1_s = _prf(tn_u, fn_u, fp_u)
    return {
        "accuracy": _safe_div(tp_u + tn_u, n),
        "f1_macro": (f1_u + f1_s) / 2.0,
    }


@dataclass(frozen=True)
class ClassReport:
    precision: float
    recall: float
    f1: float
    support: int

    def to_json_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "support": self.support,
        }


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    f1_macro: float
    per_class: dict[VeracityLabel, ClassReport]
    confusion: dict[str, dict[str, int]]
    n: int
    seed: int | None = None

    def to_json_dict(self) -> dict:
        d = {
            "accuracy": self.accuracy,
            "f1_macro": self.f1_macro,
            "per_class": {
                label.value: report.to_json_dict()
                for label, report in self.per_class.items()
            },
            "confusion": self.confusion,
            "n": self.n,
        }
        if self.seed is not None:
            d["seed"] = self.seed
        return d


def evaluate(
    pairs: Iterable[tuple[VeracityLabel, VeracityLabel]],
    seed: int | None = None,
) -> EvalReport:
    """Evaluate (gold, predicted) label pairs."""
    counts = {(g, p): 0 for g in _LABELS for p in _LABELS}
    n = 0
    for gold, pred in pairs:
        counts[(gold, pred)] += 1
        n += 1
    if n == 0:
        raise ValidationError("cannot evaluate zero predictions")

    per_class: dict[VeracityLabel, ClassReport] = {}
    for label in _LABELS:
        tp = counts[(label, label)]
        fp = sum(counts[(g, label)] for g in _LABELS if g is not label)
        fn = sum(counts[(label, p)] for p in _LABELS if p is not label)
        support = tp + fn
        precision, recall, f1 = _prf(tp, fp, fn)
        per_class[label] = ClassReport(precision, recall, f1, support)

    accuracy = sum(counts[(label, label)] for label in _LABELS) / n
    f1_macro = sum(report.f1 for report in per_class.values()) / len(_LABELS)
    confusion = {
        gold.value: {pred.value: counts[(gold, pred)] for pred in _LABELS}
        for gold in _LABELS
    }
    return EvalReport(
        accuracy=accuracy,
        f1_macro=f1_macro,
        per_class=per_class,
        confusion=confusion,
        n=n,
        seed=seed,
    )
