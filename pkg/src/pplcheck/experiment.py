"""Few-shot experiment protocol.

One experiment = score every claim once, then for each seed: split into
shots and test, fit the threshold on the shots, predict the test portion,
evaluate.  Results aggregate as mean and sample standard deviation
(ddof=1; a single seed reports 0.0) over seeds.

The protocol runs either live against a backend or offline from a
persisted scores file; both paths share the same split and fit code, so
seeds mean the same thing everywhere.
"""

from __future__ import annotations

import csv
import statistics
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .backends.base import LmBackend, ScoringMode
from .classify import GridSearch, MajorityBaseline, ThresholdClassifier, fit_threshold
from .data import Dataset, VeracityLabel
from .errors import InputError, ValidationError
from .metrics import EvalReport, evaluate
from .scoring import Provenance, ScoresFile, score_dataset
from .splits import split_pairs

DEFAULT_SEEDS = (13, 42, 2020)

# (id, gold label, perplexity) in dataset order.
ScoredRow = tuple[str, VeracityLabel, float]


@dataclass(frozen=True)
class SeedResult:
    seed: int
    threshold: float | None
    fit_objective_value: float | None
    eval: EvalReport
    n_test: int

    def to_json_dict(self) -> dict:
        return {
            "seed": self.seed,
            "threshold": self.threshold,
            "fit_objective_value": self.fit_objective_value,
            "eval": self.eval.to_json_dict(),
            "n_test": self.n_test,
        }


@dataclass(frozen=True)
class ExperimentReport:
    kind: str
    n_shots: int
    seeds: tuple[int, ...]
    objective: str
    stratified: bool
    per_seed: tuple[SeedResult, ...]
    aggregate: dict[str, float]
    scoring: dict

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "n_shots": self.n_shots,
            "seeds": list(self.seeds),
            "objective": self.objective,
            "stratified": self.stratified,
            "per_seed": [r.to_json_dict() for r in self.per_seed],
            "aggregate": self.aggregate,
            "scoring": self.scoring,
        }


def _aggregate(per_seed: Sequence[SeedResult]) -> dict[str, float]:
    def mean_std(values: list[float]) -> tuple[float, float]:
        mean = statistics.fmean(values)
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        return mean, std

    acc_mean, acc_std = mean_std([r.eval.accuracy for r in per_seed])
    f1_mean, f1_std = mean_std([r.eval.f1_macro for r in per_seed])
    return {
        "accuracy_mean": acc_mean,
        "accuracy_std": acc_std,
        "f1_macro_mean": f1_mean,
        "f1_macro_std": f1_std,
    }


def _check_seeds(seeds: Sequence[int]) -> tuple[int, ...]:
    seeds = tuple(int(s) for s in seeds)
    if not seeds:
        raise ValidationError("need at least one seed")
    if len(set(seeds)) != len(seeds):
        raise ValidationError(f"duplicate seeds in {seeds}")
    return seeds


def _run_one_seed(
    rows: Sequence[ScoredRow],
    n_shots: int,
    seed: int,
    objective: str,
    grid: GridSearch | None,
    stratified: bool,
    provenance_hash: str | None,
) -> tuple[SeedResult, ThresholdClassifier]:
    by_id = {row[0]: row for row in rows}
    split = split_pairs([(r[0], r[1]) for r in rows], n_shots, seed, stratified)
    shots = [(by_id[i][2], by_id[i][1]) for i in split.shot_ids]
    clf = fit_threshold(
        shots,
        objective=objective,
        grid=grid,
        seed=seed,
        provenance_hash=provenance_hash,
    )
    test = [by_id[i] for i in split.test_ids]
    preds = clf.predict([row[2] for row in test], provenance_hash=provenance_hash)
    report = evaluate(
        [(row[1], pred) for row, pred in zip(test, preds)], seed=seed
    )
    result = SeedResult(
        seed=seed,
        threshold=clf.threshold,
        fit_objective_value=clf.fit_report.objective_value,
        eval=report,
        n_test=len(test),
    )
    return result, clf


def experiment_from_rows(
    rows: Sequence[ScoredRow],
    n_shots: int,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    objective: str = "f1_macro",
    grid: GridSearch | None = None,
    stratified: bool = False,
    provenance_hash: str | None = None,
    scoring_info: dict | None = None,
) -> ExperimentReport:
    seeds = _check_seeds(seeds)
    per_seed = [
        _run_one_seed(rows, n_shots, seed, objective, grid, stratified, provenance_hash)[0]
        for seed in seeds
    ]
    return ExperimentReport(
        kind="threshold",
        n_shots=n_shots,
        seeds=seeds,
        objective=objective,
        stratified=stratified,
        per_seed=tuple(per_seed),
        aggregate=_aggregate(per_seed),
        scoring=scoring_info or {},
    )


def experiment_from_scores(
    scores: ScoresFile,
    n_shots: int,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    objective: str = "f1_macro",
    grid: GridSearch | None = None,
    stratified: bool = False,
) -> ExperimentReport:
    rows = [(row.id, row.label, row.perplexity) for row in scores.rows]
    info = {
        key: scores.header[key]
        for key in ("backend", "model", "mode", "conditioned", "tokenizer_note",
                    "dataset_hash", "provenance_hash")
    }
    return experiment_from_rows(
        rows,
        n_shots,
        seeds=seeds,
        objective=objective,
        grid=grid,
        stratified=stratified,
        provenance_hash=scores.provenance_hash,
        scoring_info=info,
    )


def run_experiment(
    backend: LmBackend,
    dataset: Dataset,
    n_shots: int,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    mode: ScoringMode = ScoringMode.CAUSAL,
    conditioned: bool = True,
    objective: str = "f1_macro",
    grid: GridSearch | None = None,
    stratified: bool = False,
    jobs: int = 1,
) -> ExperimentReport:
    """Score the dataset once, then run every seed on the shared scores.
    Any scoring failure aborts the experiment."""
    scored, _ = score_dataset(
        backend, dataset, mode=mode, conditioned=conditioned, fail_fast=True, jobs=jobs
    )
    provenance = Provenance.for_backend(backend, mode, conditioned)
    rows = [(sc.record.id, sc.record.label, sc.perplexity) for sc in scored]
    info = dict(provenance.to_json_dict())
    info["provenance_hash"] = provenance.hash
    return experiment_from_rows(
        rows,
        n_shots,
        seeds=seeds,
        objective=objective,
        grid=grid,
        stratified=stratified,
        provenance_hash=provenance.hash,
        scoring_info=info,
    )


def baseline_experiment(
    pairs: Sequence[tuple[str, VeracityLabel]],
    n_shots: int,
    seeds: Sequence[int] = DEFAULT_SEEDS,
    stratified: bool = False,
    scoring_info: dict | None = None,
) -> ExperimentReport:
    """Majority-class reference run over the same splits as the real
    experiment, so the comparison shares everything but the classifier.
    Needs labels only, no scores."""
    seeds = _check_seeds(seeds)
    by_id = {item_id: label for item_id, label in pairs}
    per_seed = []
    for seed in seeds:
        split = split_pairs(pairs, n_shots, seed, stratified)
        baseline = MajorityBaseline.fit([by_id[i] for i in split.shot_ids])
        preds = baseline.predict(len(split.test_ids))
        report = evaluate(
            [(by_id[i], pred) for i, pred in zip(split.test_ids, preds)], seed=seed
        )
        per_seed.append(
            SeedResult(
                seed=seed,
                threshold=None,
                fit_objective_value=None,
                eval=report,
                n_test=len(split.test_ids),
            )
        )
    return ExperimentReport(
        kind="majority-baseline",
        n_shots=n_shots,
        seeds=seeds,
        objective="majority",
        stratified=stratified,
        per_seed=tuple(per_seed),
        aggregate=_aggregate(per_seed),
        scoring=scoring_info or {},
    )


def write_report_csv(report: ExperimentReport, path: str | Path) -> None:
    """Per-seed rows plus an aggregate row, for spreadsheet digestion."""
    fields = ["seed", "n_shots", "n_test", "threshold", "accuracy", "f1_macro"]
    try:
        with Path(path).open("w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(fields)
            for result in report.per_seed:
                writer.writerow(
                    [
                        result.seed,
                        report.n_shots,
                        result.n_test,
                        "" if result.threshold is None else result.threshold,
                        f"{result.eval.accuracy:.6f}",
                        f"{result.eval.f1_macro:.6f}",
                    ]
                )
            agg = report.aggregate
            writer.writerow(
                [
                    "mean±std",
                    report.n_shots,
                    "",
                    "",
                    f"{agg['accuracy_mean']:.6f}±{agg['accuracy_std']:.6f}",
                    f"{agg['f1_macro_mean']:.6f}±{agg['f1_macro_std']:.6f}",
                ]
            )
    except OSError as exc:
        raise InputError(f"cannot write report {path}: {exc}") from exc
