"""Canonical data model, dataset file ingestion, and label-space mappings.

The native dataset format is line-delimited JSON (UTF-8), one record per
line with fields ``{id, claim, evidence, label, source_label?}``.  Labels
are parsed case-insensitively from {"SUPPORTED", "UNSUPPORTED"}.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from .errors import (
    DuplicateIdError,
    InputError,
    ParseError,
    UnknownLabelError,
    ValidationError,
)
from .rng import Splitmix64


class VeracityLabel(Enum):
    SUPPORTED = "SUPPORTED"
    UNSUPPORTED = "UNSUPPORTED"

    @classmethod
    def parse(cls, raw: str) -> "VeracityLabel":
        try:
            return cls(raw.strip().upper())
        except ValueError:
            raise UnknownLabelError(
                f"unknown veracity label {raw!r}; expected SUPPORTED or UNSUPPORTED"
            ) from None

    def flipped(self) -> "VeracityLabel":
        return (
            VeracityLabel.UNSUPPORTED
            if self is VeracityLabel.SUPPORTED
            else VeracityLabel.SUPPORTED
        )


@dataclass(frozen=True)
class ClaimRecord:
    """One claim plus its gold evidence and binary veracity label.

    Validity (non-empty claim, unique id) is enforced at ingestion
    boundaries (`load_dataset`, converters), not by the constructor, so
    error-routing paths can be exercised with deliberately bad records.
    """

    id: str
    claim: str
    evidence: str
    label: VeracityLabel
    source_label: str | None = None

    def to_json_dict(self) -> dict:
        d = {
            "id": self.id,
            "claim": self.claim,
            "evidence": self.evidence,
            "label": self.label.value,
        }
        if self.source_label is not None:
            d["source_label"] = self.source_label
        return d


@dataclass(frozen=True)
class Dataset:
    """Immutable, ordered collection of records; safe to share across threads.

    Record order is the loaded file order; all seeded sampling is defined
    relative to it.
    """

    name: str
    records: tuple[ClaimRecord, ...] = field(default_factory=tuple)

    @property
    def class_counts(self) -> dict[VeracityLabel, int]:
        counts = {VeracityLabel.SUPPORTED: 0, VeracityLabel.UNSUPPORTED: 0}
        for rec in self.records:
            counts[rec.label] += 1
        return counts

    def __len__(self) -> int:
        return len(self.records)

    def by_id(self) -> dict[str, ClaimRecord]:
        return {rec.id: rec for rec in self.records}


def _record_from_json(path: str, line_no: int, obj: dict) -> ClaimRecord:
    if not isinstance(obj, dict):
        raise ParseError(path, line_no, "record is not a JSON object")
    for key in ("id", "claim", "evidence", "label"):
        if key not in obj:
            raise ParseError(path, line_no, f"missing field {key!r}")
    rec_id = str(obj["id"])
    claim = str(obj["claim"])
    if not claim.strip():
        raise ParseError(path, line_no, "claim is empty")
    label = VeracityLabel.parse(str(obj["label"]))
    source_label = obj.get("source_label")
    return ClaimRecord(
        id=rec_id,
        claim=claim,
        evidence=str(obj["evidence"]),
        label=label,
        source_label=None if source_label is None else str(source_label),
    )


def load_dataset(path: str | Path, format: str = "native-jsonl") -> Dataset:
    """Load a native JSONL dataset, preserving line order.

    Raises ParseError (with line number) on malformed lines,
    DuplicateIdError on repeated ids, UnknownLabelError on bad labels,
    InputError if the file cannot be read.
    """
    if format != "native-jsonl":
        raise ValidationError(f"unknown dataset format {format!r}")
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read dataset {path}: {exc}") from exc

    records: list[ClaimRecord] = []
    seen: set[str] = set()
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(str(path), line_no, f"invalid JSON: {exc.msg}") from exc
        rec = _record_from_json(str(path), line_no, obj)
        if rec.id in seen:
            raise DuplicateIdError(f"{path}:{line_no}: duplicate record id {rec.id!r}")
        seen.add(rec.id)
        records.append(rec)
    return Dataset(name=path.stem, records=tuple(records))


def save_dataset(ds: Dataset, path: str | Path) -> None:
    path = Path(path)
    try:
        with path.open("w", encoding="utf-8") as fh:
            for rec in ds.records:
                fh.write(json.dumps(rec.to_json_dict(), ensure_ascii=False) + "\n")
    except OSError as exc:
        raise InputError(f"cannot write dataset {path}: {exc}") from exc


# --- label-space mappings -------------------------------------------------

_FEVER_MAP = {
    "SUPPORTS": VeracityLabel.SUPPORTED,
    "REFUTES": VeracityLabel.UNSUPPORTED,
    "NOT ENOUGH INFO": VeracityLabel.UNSUPPORTED,
}

# Six-point truth scale, least to most truthful; the first three collapse
# to UNSUPPORTED, the rest to SUPPORTED.
_POLITIFACT_ORDER = (
    "pants-fire",
    "false",
    "barely-true",
    "half-true",
    "mostly-true",
    "true",
)
_POLITIFACT_MAP = {
    name: (VeracityLabel.UNSUPPORTED if i < 3 else VeracityLabel.SUPPORTED)
    for i, name in enumerate(_POLITIFACT_ORDER)
}


def map_fever_label(source: str) -> VeracityLabel:
    """SUPPORTS -> Supported; REFUTES and NOT ENOUGH INFO -> Unsupported."""
    key = " ".join(source.replace("_", " ").upper().split())
    try:
        return _FEVER_MAP[key]
    except KeyError:
        raise UnknownLabelError(f"unknown FEVER label {source!r}") from None


def map_politifact_label(source: str) -> VeracityLabel:
    key = "-".join(source.strip().lower().replace("_", "-").split())
    try:
        return _POLITIFACT_MAP[key]
    except KeyError:
        raise UnknownLabelError(f"unknown Politifact label {source!r}") from None


# --- converters for external exports --------------------------------------


def _join_evidence(evidence, max_sentences: int | None) -> str:
    """Join list-valued evidence with single spaces, preserving order."""
    if isinstance(evidence, str):
        return evidence
    if isinstance(evidence, (list, tuple)):
        sentences = [str(s).strip() for s in evidence if str(s).strip()]
        if max_sentences is not None:
            sentences = sentences[:max_sentences]
        return " ".join(sentences)
    return str(evidence)


def _read_jsonl(path: Path) -> list[dict]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = []
    for line_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ParseError(str(path), line_no, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(obj, dict):
            raise ParseError(str(path), line_no, "record is not a JSON object")
        rows.append(obj)
    return rows


def convert_fever(
    rows: Iterable[dict],
    seed: int = 13,
    max_evidence_sentences: int | None = None,
) -> list[ClaimRecord]:
    """Convert FEVER-style rows to balanced binary records.

    Input rows carry {id, claim, label in {SUPPORTS, REFUTES, NOT ENOUGH
    INFO}, evidence: str | [str]}.  The Unsupported side is half REFUTES /
    half NOT ENOUGH INFO (odd remainder goes to REFUTES), the Supported
    side matches its size; selection within each class is a seeded shuffle.
    """
    groups: dict[str, list[ClaimRecord]] = {"SUPPORTS": [], "REFUTES": [], "NOT ENOUGH INFO": []}
    seen: set[str] = set()
    for i, row in enumerate(rows, start=1):
        raw_label = " ".join(str(row.get("label", "")).replace("_", " ").upper().split())
        if raw_label not in groups:
            raise UnknownLabelError(f"row {i}: unknown FEVER label {row.get('label')!r}")
        rec_id = str(row.get("id", i))
        if rec_id in seen:
            raise DuplicateIdError(f"duplicate id {rec_id!r} in FEVER export")
        seen.add(rec_id)
        claim = str(row.get("claim", "")).strip()
        if not claim:
            raise ValidationError(f"row {i}: empty claim")
        groups[raw_label].append(
            ClaimRecord(
                id=rec_id,
                claim=claim,
                evidence=_join_evidence(row.get("evidence", ""), max_evidence_sentences),
                label=map_fever_label(raw_label),
                source_label=raw_label,
            )
        )

    sup, ref, nei = groups["SUPPORTS"], groups["REFUTES"], groups["NOT ENOUGH INFO"]
    target = min(len(sup), 2 * min(len(ref), len(nei)))
    ref_n = (target + 1) // 2
    nei_n = target // 2

    rng = Splitmix64(seed)
    for group in (sup, ref, nei):
        rng.shuffle(group)
    return sup[:target] + ref[:ref_n] + nei[:nei_n]


def convert_politifact(rows: Iterable[dict]) -> list[ClaimRecord]:
    """Convert six-class Politifact-style rows; keeps every record."""
    out: list[ClaimRecord] = []
    seen: set[str] = set()
    for i, row in enumerate(rows, start=1):
        raw_label = str(row.get("label", ""))
        rec_id = str(row.get("id", i))
        if rec_id in seen:
            raise DuplicateIdError(f"duplicate id {rec_id!r} in Politifact export")
        seen.add(rec_id)
        claim = str(row.get("claim", "")).strip()
        if not claim:
            raise ValidationError(f"row {i}: empty claim")
        evidence = row.get("evidence", row.get("justification", ""))
        out.append(
            ClaimRecord(
                id=rec_id,
                claim=claim,
                evidence=_join_evidence(evidence, None),
                label=map_politifact_label(raw_label),
                source_label=raw_label,
            )
        )
    return out


def convert_fever_file(
    in_path: str | Path,
    out_path: str | Path,
    seed: int = 13,
    max_evidence_sentences: int | None = None,
) -> Dataset:
    records = convert_fever(_read_jsonl(Path(in_path)), seed, max_evidence_sentences)
    ds = Dataset(name=Path(out_path).stem, records=tuple(records))
    save_dataset(ds, out_path)
    return ds


def convert_politifact_file(in_path: str | Path, out_path: str | Path) -> Dataset:
    records = convert_politifact(_read_jsonl(Path(in_path)))
    ds = Dataset(name=Path(out_path).stem, records=tuple(records))
    save_dataset(ds, out_path)
    return ds


def records_in_order(ds: Dataset, ids: Sequence[str]) -> list[ClaimRecord]:
    index = ds.by_id()
    missing = [i for i in ids if i not in index]
    if missing:
        raise ValidationError(f"ids not in dataset: {missing[:5]}")
    return [index[i] for i in ids]
