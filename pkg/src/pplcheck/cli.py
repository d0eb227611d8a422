"""Command-line entry point.

Commands are deliberately split so that expensive scoring runs once and
threshold experiments iterate on the cached scores file.  Every
artifact-producing command writes a `<artifact>.manifest.json` next to its
output recording flags, input hashes, and tool version.

Exit codes: 0 success, 2 validation/usage, 3 file I/O, 4 backend
unavailable.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click

from .backends import NgramModel, RemoteBackend, train_ngram
from .backends.base import LmBackend, ScoringMode
from .classify import GridSearch
from .data import (
    convert_fever_file,
    convert_politifact_file,
    load_dataset,
    save_dataset,
)
from .errors import (
    BackendUnavailableError,
    InputError,
    PplcheckError,
    UnsupportedModeError,
    ValidationError,
)
from .experiment import (
    DEFAULT_SEEDS,
    baseline_experiment,
    experiment_from_scores,
    write_report_csv,
)
from .manifest import sha256_file, tool_version, write_manifest
from .negation import load_verb_lexicon, negate_dataset
from .ranking import as_rank_items, rank_claims
from .scoring import Provenance, read_scores, score_dataset, write_scores

_DEFAULT_SEEDS_TEXT = ",".join(str(s) for s in DEFAULT_SEEDS)


def handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except PplcheckError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)

    return wrapper


def _read_text(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc


def _write_json(path: str, payload: dict) -> None:
    try:
        Path(path).write_text(
            json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc}") from exc


def _parse_seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise ValidationError(f"--seeds must be comma-separated integers, got {text!r}") from None
    if not seeds:
        raise ValidationError("--seeds must name at least one seed")
    return seeds


def _parse_search(text: str) -> GridSearch | None:
    if text == "exact":
        return None
    if text == "grid":
        return GridSearch(0.0, 1000.0, 1.0)
    if text.startswith("grid:"):
        parts = text.split(":")[1:]
        if len(parts) != 3:
            raise ValidationError("--search grid form is grid:LO:HI:STEP")
        try:
            lo, hi, step = (float(p) for p in parts)
        except ValueError:
            raise ValidationError(f"--search grid bounds must be numbers, got {text!r}") from None
        return GridSearch(lo, hi, step)
    raise ValidationError(f"--search must be exact, grid, or grid:LO:HI:STEP, got {text!r}")


def _make_backend(
    locator: str, model: str | None, timeout: float, jobs: int, retries: int
) -> LmBackend:
    if locator.startswith("ngram:"):
        return NgramModel.load(locator[len("ngram:"):])
    if locator.startswith("remote:"):
        url = locator[len("remote:"):]
        if not model:
            raise ValidationError("--model is required with a remote backend")
        return RemoteBackend(url, model, timeout=timeout, max_in_flight=jobs, retries=retries)
    raise ValidationError(f"--backend must look like ngram:PATH or remote:URL, got {locator!r}")


def _echo_report(report) -> None:
    for result in report.per_seed:
        th = "-" if result.threshold is None else f"{result.threshold:.4f}"
        click.echo(
            f"seed {result.seed}: accuracy {result.eval.accuracy:.4f}"
            f"  f1_macro {result.eval.f1_macro:.4f}  threshold {th}"
            f"  (test n={result.n_test})"
        )
    agg = report.aggregate
    click.echo(
        f"aggregate over {len(report.seeds)} seed(s):"
        f" accuracy {agg['accuracy_mean']:.4f}±{agg['accuracy_std']:.4f}"
        f"  f1_macro {agg['f1_macro_mean']:.4f}±{agg['f1_macro_std']:.4f}"
    )


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(version=tool_version(), prog_name="pplcheck")
@click.option(
    "--config",
    "config_path",
    default=None,
    help="JSON file of per-command flag defaults, e.g. {\"run\": {\"shots\": 50}}.",
)
@click.pass_context
def main(ctx, config_path):
    """Few-shot claim verification by evidence-conditioned perplexity."""
    if config_path:
        try:
            ctx.default_map = json.loads(_read_text(config_path))
        except json.JSONDecodeError as exc:
            click.echo(f"error: bad config {config_path}: {exc.msg}", err=True)
            sys.exit(2)
        except PplcheckError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(exc.exit_code)


@main.command("ngram-train")
@click.option("--corpus", required=True, help="Plain-text training corpus, one sequence per line.")
@click.option("--order", type=int, required=True)
@click.option("--alpha", type=float, default=1.0, show_default=True)
@click.option("--extra-vocab", default=None, help="Optional file of extra vocabulary tokens, one per line.")
@click.option("--out", required=True)
@handle_errors
def cmd_ngram_train(corpus, order, alpha, extra_vocab, out):
    """Train an additive-smoothed n-gram model and save it as JSON."""
    if order < 1:
        raise ValidationError("--order must be >= 1")
    if not alpha > 0:
        raise ValidationError("--alpha must be > 0")
    text = _read_text(corpus)
    extra = ()
    if extra_vocab:
        extra = tuple(tok for tok in _read_text(extra_vocab).split() if tok)
    model = train_ngram(text, order=order, alpha=alpha, extra_vocab=extra)
    model.save(out)
    config = {
        "corpus": corpus, "order": order, "alpha": alpha,
        "extra_vocab": extra_vocab, "out": out,
    }
    write_manifest(out, "ngram-train", config, {"corpus": corpus}, {"model": out})
    click.echo(
        f"trained order-{order} model ({len(model.vocab)} vocabulary entries) -> {out}"
    )


@main.command("score")
@click.option("--dataset", required=True)
@click.option("--backend", "backend_spec", required=True, help="ngram:PATH or remote:URL")
@click.option("--model", default=None, help="Model name to request from a remote backend.")
@click.option("--mode", type=click.Choice(["causal", "masked"]), default="causal", show_default=True)
@click.option("--no-evidence", is_flag=True, help="Ablation: score claims without their evidence prefix.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Concurrent scoring requests.")
@click.option("--timeout", type=float, default=60.0, show_default=True)
@click.option("--retries", type=int, default=2, show_default=True)
@click.option("--keep-logprobs", is_flag=True, help="Persist per-token log probabilities in the rows.")
@click.option("--best-effort", is_flag=True, help="Skip failing records instead of aborting.")
@click.option("--out", required=True)
@handle_errors
def cmd_score(
    dataset, backend_spec, model, mode, no_evidence, jobs, timeout, retries,
    keep_logprobs, best_effort, out,
):
    """Score every claim's perplexity and write a scores JSONL file."""
    ds = load_dataset(dataset)
    backend = _make_backend(backend_spec, model, timeout, jobs, retries)
    mode_enum = ScoringMode.parse(mode)
    if not backend.supports(mode_enum):
        raise UnsupportedModeError(
            f"backend {backend.backend_id!r} does not support --mode {mode}"
        )
    conditioned = not no_evidence
    scored, errors = score_dataset(
        backend, ds, mode=mode_enum, conditioned=conditioned,
        fail_fast=not best_effort, jobs=jobs, keep_logprobs=keep_logprobs,
    )
    for err in errors:
        click.echo(f"skipped {err['id']}: {err['error']}", err=True)
    if any(e["type"] == "BackendUnavailableError" for e in errors):
        raise BackendUnavailableError(f"{len(errors)} records failed against the backend")
    if not scored:
        raise ValidationError("no records were scored")
    provenance = Provenance.for_backend(backend, mode_enum, conditioned)
    write_scores(out, scored, provenance, dataset_hash=sha256_file(dataset),
                 keep_logprobs=keep_logprobs)
    config = {
        "dataset": dataset, "backend": backend_spec, "model": model, "mode": mode,
        "no_evidence": no_evidence, "jobs": jobs, "timeout": timeout,
        "retries": retries, "keep_logprobs": keep_logprobs,
        "best_effort": best_effort, "out": out,
    }
    write_manifest(out, "score", config, {"dataset": dataset}, {"scores": out})
    click.echo(f"scored {len(scored)}/{len(ds)} records -> {out}")


@main.command("run")
@click.option("--scores", required=True, help="Scores JSONL produced by `pplcheck score`.")
@click.option("--dataset", default=None,
              help="Optional cross-check that the scores came from this dataset file.")
@click.option("--shots", type=int, required=True)
@click.option("--seeds", default=_DEFAULT_SEEDS_TEXT, show_default=True)
@click.option("--objective", type=click.Choice(["f1_macro", "accuracy"]),
              default="f1_macro", show_default=True)
@click.option("--search", default="exact", show_default=True,
              help="exact, grid, or grid:LO:HI:STEP")
@click.option("--stratified", is_flag=True,
              help="Force both classes into the shot set when possible.")
@click.option("--out", default=None, help="Write the full JSON report here.")
@click.option("--csv", "csv_path", default=None, help="Write a per-seed CSV table here.")
@handle_errors
def cmd_run(scores, dataset, shots, seeds, objective, search, stratified, out, csv_path):
    """Fit thresholds on few-shot splits and evaluate, one run per seed."""
    scores_file = read_scores(scores)
    if dataset is not None:
        if sha256_file(dataset) != scores_file.header["dataset_hash"]:
            raise ValidationError(
                f"scores {scores} were not produced from dataset {dataset} (hash mismatch)"
            )
    report = experiment_from_scores(
        scores_file,
        shots,
        seeds=_parse_seeds(seeds),
        objective=objective,
        grid=_parse_search(search),
        stratified=stratified,
    )
    _echo_report(report)
    config = {
        "scores": scores, "dataset": dataset, "shots": shots, "seeds": seeds,
        "objective": objective, "search": search, "stratified": stratified,
        "out": out, "csv": csv_path,
    }
    inputs = {"scores": scores}
    if dataset is not None:
        inputs["dataset"] = dataset
    if out:
        _write_json(out, report.to_json_dict())
        write_manifest(out, "run", config, inputs, {"report": out})
    if csv_path:
        write_report_csv(report, csv_path)
        write_manifest(csv_path, "run", config, inputs, {"table": csv_path})


@main.command("rank")
@click.option("--scores", required=True)
@click.option("--k-max", type=int, required=True, help="Report precision at k for k = 1..k-max.")
@click.option("--trials", type=int, default=10, show_default=True,
              help="Random-permutation baseline trials.")
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--out", default=None)
@handle_errors
def cmd_rank(scores, k_max, trials, seed, out):
    """Rank claims most-suspicious-first and report precision at k."""
    scores_file = read_scores(scores)
    n = len(scores_file.rows)
    if not 1 <= k_max <= n:
        raise ValidationError(f"--k-max must be within [1, {n}], got {k_max}")
    report = rank_claims(
        as_rank_items(scores_file.rows),
        ks=range(1, k_max + 1),
        baseline_trials=trials,
        seed=seed,
    )
    shown = sorted({1, 5, 10, 20, 50, 100, k_max} & set(report.precision_at))
    for k in shown:
        click.echo(
            f"P@{k}: {report.precision_at[k]:.4f}"
            f"  (random baseline {report.baseline_at[k]:.4f})"
        )
    if out:
        _write_json(out, report.to_json_dict())
        config = {"scores": scores, "k_max": k_max, "trials": trials, "seed": seed, "out": out}
        write_manifest(out, "rank", config, {"scores": scores}, {"report": out})


@main.command("negate")
@click.option("--dataset", required=True)
@click.option("--out", required=True)
@click.option("--mode", type=click.Choice(["first-match", "all-match"]),
              default="first-match", show_default=True)
@click.option("--lexicon", default=None, help="Custom do-support verb lexicon file.")
@handle_errors
def cmd_negate(dataset, out, mode, lexicon):
    """Augment a dataset with negated claims (flipped labels)."""
    ds = load_dataset(dataset)
    lex = load_verb_lexicon(lexicon) if lexicon else None
    augmented, skipped = negate_dataset(ds, lexicon=lex, all_match=(mode == "all-match"))
    save_dataset(augmented, out)
    skips_path = str(out) + ".skips.json"
    _write_json(skips_path, {"skipped_ids": skipped, "count": len(skipped)})
    config = {"dataset": dataset, "out": out, "mode": mode, "lexicon": lexicon}
    write_manifest(out, "negate", config, {"dataset": dataset},
                   {"dataset": out, "skips": skips_path})
    click.echo(
        f"added {len(augmented) - len(ds)} negations to {len(ds)} records"
        f" ({len(skipped)} skipped) -> {out}"
    )


@main.command("baseline")
@click.option("--dataset", required=True)
@click.option("--shots", type=int, required=True)
@click.option("--seeds", default=_DEFAULT_SEEDS_TEXT, show_default=True)
@click.option("--stratified", is_flag=True)
@click.option("--out", default=None)
@handle_errors
def cmd_baseline(dataset, shots, seeds, stratified, out):
    """Majority-class reference over the same splits as `run`."""
    ds = load_dataset(dataset)
    report = baseline_experiment(
        [(rec.id, rec.label) for rec in ds.records],
        shots,
        seeds=_parse_seeds(seeds),
        stratified=stratified,
    )
    _echo_report(report)
    if out:
        _write_json(out, report.to_json_dict())
        config = {"dataset": dataset, "shots": shots, "seeds": seeds,
                  "stratified": stratified, "out": out}
        write_manifest(out, "baseline", config, {"dataset": dataset}, {"report": out})


@main.command("convert-fever")
@click.option("--in", "src", required=True, help="FEVER-style JSONL export.")
@click.option("--out", required=True)
@click.option("--seed", type=int, default=13, show_default=True)
@click.option("--max-evidence-sentences", type=int, default=None,
              help="Keep at most this many evidence sentences per record.")
@handle_errors
def cmd_convert_fever(src, out, seed, max_evidence_sentences):
    """Convert a FEVER-style export to the balanced native format."""
    ds = convert_fever_file(src, out, seed=seed,
                            max_evidence_sentences=max_evidence_sentences)
    counts = {label.value: n for label, n in ds.class_counts.items()}
    config = {"in": src, "out": out, "seed": seed,
              "max_evidence_sentences": max_evidence_sentences}
    write_manifest(out, "convert-fever", config, {"source": src}, {"dataset": out})
    click.echo(f"converted {len(ds)} records {counts} -> {out}")


@main.command("convert-politifact")
@click.option("--in", "src", required=True, help="Six-class truth-rating JSONL export.")
@click.option("--out", required=True)
@handle_errors
def cmd_convert_politifact(src, out):
    """Convert a Politifact-style export to the native format."""
    ds = convert_politifact_file(src, out)
    counts = {label.value: n for label, n in ds.class_counts.items()}
    write_manifest(out, "convert-politifact", {"in": src, "out": out},
                   {"source": src}, {"dataset": out})
    click.echo(f"converted {len(ds)} records {counts} -> {out}")


if __name__ == "__main__":
    main()
