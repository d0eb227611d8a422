"""Perplexity scoring of claims and the scores file format.

Perplexity here is exp(-mean log p) over the target tokens only, with
natural logs throughout.  When a claim is scored "conditioned", its
evidence text is the context prefix; the evidence tokens themselves are
never scored.

Scores persist as JSONL: a header line that pins the scoring
configuration (backend, model, mode, conditioning, tokenizer note,
dataset hash) followed by one row per claim.  The header carries a
provenance hash so downstream consumers can refuse to mix scores
produced under different configurations.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .backends.base import LmBackend, ScoringMode, TokenLogProbs
from .data import ClaimRecord, Dataset, VeracityLabel
from .errors import (
    DuplicateIdError,
    EmptyTargetError,
    InputError,
    ParseError,
    ValidationError,
)
from .manifest import canonical_json, now_iso, sha256_text

SCORES_FORMAT = "pplcheck-scores"
SCORES_VERSION = 1


def perplexity_from_logprobs(logprobs: Sequence[float]) -> float:
    if not logprobs:
        raise EmptyTargetError("cannot compute perplexity over zero tokens")
    return math.exp(-sum(logprobs) / len(logprobs))


@dataclass(frozen=True)
class Provenance:
    """Everything that makes two scoring runs comparable."""

    backend: str
    model: str
    mode: ScoringMode
    conditioned: bool
    tokenizer_note: str

    def to_json_dict(self) -> dict:
        return {
            "backend": self.backend,
            "model": self.model,
            "mode": self.mode.value,
            "conditioned": self.conditioned,
            "tokenizer_note": self.tokenizer_note,
        }

    @property
    def hash(self) -> str:
        return sha256_text(canonical_json(self.to_json_dict()))

    @classmethod
    def for_backend(cls, backend: LmBackend, mode: ScoringMode, conditioned: bool) -> "Provenance":
        return cls(
            backend=backend.backend_id,
            model=backend.model_name,
            mode=mode,
            conditioned=conditioned,
            tokenizer_note=backend.tokenizer_note,
        )


@dataclass(frozen=True)
class ScoredClaim:
    record: ClaimRecord
    mode: ScoringMode
    conditioned: bool
    perplexity: float
    C: int
    token_logprobs: TokenLogProbs | None = None
    provenance_hash: str | None = None

    def __post_init__(self):
        if self.C < 1:
            raise ValidationError(f"token count must be >= 1, got {self.C}")
        if not math.isfinite(self.perplexity) or self.perplexity <= 0:
            raise ValidationError(f"bad perplexity {self.perplexity!r}")
        if self.token_logprobs is not None:
            if self.token_logprobs.token_count != self.C:
                raise ValidationError(
                    f"C={self.C} does not match {self.token_logprobs.token_count} logprobs"
                )
            expected = perplexity_from_logprobs(self.token_logprobs.logprobs)
            if not math.isclose(self.perplexity, expected, rel_tol=1e-9):
                raise ValidationError(
                    f"perplexity {self.perplexity} inconsistent with logprobs ({expected})"
                )


def score_claim(
    backend: LmBackend,
    record: ClaimRecord,
    mode: ScoringMode = ScoringMode.CAUSAL,
    conditioned: bool = True,
    keep_logprobs: bool = True,
    provenance_hash: str | None = None,
) -> ScoredClaim:
    """Score one claim.  Empty evidence downgrades to unconditioned scoring
    and the result is flagged accordingly."""
    effective = conditioned and bool(record.evidence.strip())
    context = record.evidence if effective else ""
    tlp = backend.score(mode, context, record.claim)
    if tlp.token_count == 0:
        raise EmptyTargetError(f"record {record.id!r}: claim produced no tokens")
    return ScoredClaim(
        record=record,
        mode=mode,
        conditioned=effective,
        perplexity=perplexity_from_logprobs(tlp.logprobs),
        C=tlp.token_count,
        token_logprobs=tlp if keep_logprobs else None,
        provenance_hash=provenance_hash,
    )


def score_dataset(
    backend: LmBackend,
    dataset: Dataset,
    mode: ScoringMode = ScoringMode.CAUSAL,
    conditioned: bool = True,
    fail_fast: bool = False,
    jobs: int = 1,
    keep_logprobs: bool = False,
) -> tuple[list[ScoredClaim], list[dict]]:
    """Score every record, preserving dataset order in the output.

    Returns (scored, errors); each error entry is
    {"id", "error", "type"}.  With fail_fast the first failure is raised
    instead.  jobs > 1 fans out over a thread pool; the backend must
    tolerate concurrent calls (both built-in backends do).
    """
    if jobs < 1:
        raise ValidationError(f"jobs must be >= 1, got {jobs}")
    prov_hash = Provenance.for_backend(backend, mode, conditioned).hash

    def work(record: ClaimRecord) -> ScoredClaim:
        return score_claim(
            backend,
            record,
            mode=mode,
            conditioned=conditioned,
            keep_logprobs=keep_logprobs,
            provenance_hash=prov_hash,
        )

    errors: list[dict] = []
    if jobs == 1:
        outcomes = []
        for record in dataset.records:
            try:
                outcomes.append(work(record))
            except Exception as exc:
                if fail_fast:
                    raise
                outcomes.append(exc)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(work, record) for record in dataset.records]
            outcomes = []
            for future in futures:
                try:
                    outcomes.append(future.result())
                except Exception as exc:
                    if fail_fast:
                        raise
                    outcomes.append(exc)

    scored: list[ScoredClaim] = []
    for record, outcome in zip(dataset.records, outcomes):
        if isinstance(outcome, Exception):
            errors.append(
                {"id": record.id, "error": str(outcome), "type": type(outcome).__name__}
            )
        else:
            scored.append(outcome)
    return scored, errors


# --- scores file ------------------------------------------------------------


@dataclass(frozen=True)
class ScoreRow:
    id: str
    label: VeracityLabel
    perplexity: float
    C: int
    mode: ScoringMode
    conditioned: bool
    logprobs: tuple[float, ...] | None = None


@dataclass(frozen=True)
class ScoresFile:
    header: dict
    rows: tuple[ScoreRow, ...]

    @property
    def provenance_hash(self) -> str:
        return self.header["provenance_hash"]


def write_scores(
    path: str | Path,
    scored: Iterable[ScoredClaim],
    provenance: Provenance,
    dataset_hash: str,
    keep_logprobs: bool = False,
) -> None:
    header = dict(provenance.to_json_dict())
    header.update(
        {
            "format": SCORES_FORMAT,
            "version": SCORES_VERSION,
            "dataset_hash": dataset_hash,
            "created_at": now_iso(),
            "provenance_hash": provenance.hash,
        }
    )
    try:
        with Path(path).open("w", encoding="utf-8") as fh:
            fh.write(json.dumps(header, sort_keys=True, ensure_ascii=False) + "\n")
            for sc in scored:
                row = {
                    "id": sc.record.id,
                    "label": sc.record.label.value,
                    "perplexity": sc.perplexity,
                    "C": sc.C,
                    "mode": sc.mode.value,
                    "conditioned": sc.conditioned,
                }
                if keep_logprobs and sc.token_logprobs is not None:
                    row["logprobs"] = list(sc.token_logprobs.logprobs)
                fh.write(json.dumps(row, sort_keys=True, ensure_ascii=False) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write scores {path}: {exc}") from exc


def read_scores(path: str | Path) -> ScoresFile:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read scores {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError(str(path), 1, "empty scores file")
    try:
        header = json.loads(lines[0])
    except json.JSONDecodeError as exc:
        raise ParseError(str(path), 1, f"invalid JSON: {exc.msg}") from exc
    if not isinstance(header, dict) or header.get("format") != SCORES_FORMAT:
        raise ParseError(str(path), 1, f"not a {SCORES_FORMAT} file")
    if header.get("version") != SCORES_VERSION:
        raise ParseError(str(path), 1, f"unsupported version {header.get('version')!r}")
    for key in ("backend", "model", "mode", "conditioned", "tokenizer_note",
                "dataset_hash", "provenance_hash"):
        if key not in header:
            raise ParseError(str(path), 1, f"header missing field {key!r}")

    rows: list[ScoreRow] = []
    seen: set[str] = set()
    for line_no, line in enumerate(lines[1:], start=2):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(str(path), line_no, f"invalid JSON: {exc.msg}") from exc
        try:
            row = ScoreRow(
                id=str(obj["id"]),
                label=VeracityLabel.parse(str(obj["label"])),
                perplexity=float(obj["perplexity"]),
                C=int(obj["C"]),
                mode=ScoringMode.parse(str(obj["mode"])),
                conditioned=bool(obj["conditioned"]),
                logprobs=tuple(float(x) for x in obj["logprobs"])
                if obj.get("logprobs") is not None
                else None,
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(str(path), line_no, f"malformed score row: {exc}") from exc
        if not math.isfinite(row.perplexity) or row.perplexity <= 0:
            raise ParseError(str(path), line_no, f"bad perplexity {row.perplexity!r}")
        if row.C < 1:
            raise ParseError(str(path), line_no, f"bad token count {row.C!r}")
        if row.id in seen:
            raise DuplicateIdError(f"{path}:{line_no}: duplicate score id {row.id!r}")
        seen.add(row.id)
        rows.append(row)
    return ScoresFile(header=header, rows=tuple(rows))
