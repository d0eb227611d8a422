"""Template-based claim negation for stress-testing classifiers.

Scans word tokens left to right; the first matching rule wins:

  1. a negated auxiliary (contraction like "isn't", or "aux not" as two
     words) turns positive,
  2. a positive auxiliary gets "not" inserted ("can" becomes "cannot",
     everything else becomes "aux not"),
  3. with no auxiliary anywhere, do-support: the first token ending in
     "s" that appears in the verb lexicon becomes "does not " + stem,
  4. otherwise the claim is reported as skipped and left unchanged.

A negated auxiliary is checked before a positive one at the same token so
"is not" collapses to "is" instead of growing another "not"; this is what
makes the auxiliary rules an involution.  Replacement preserves the
original token's first-letter case and edge punctuation; output tokens are
rejoined with single spaces.
"""

from __future__ import annotations

import string
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from pathlib import Path

from .data import ClaimRecord, Dataset, VeracityLabel
from .errors import InputError, ValidationError

NEG_ID_SUFFIX = "::neg"

# Auxiliaries negated by appending "not" ("can" contracts to "cannot").
POSITIVE_AUX = frozenset(
    "is are was were can could will would shall should may might must"
    " do does did has have had".split()
)

# Contraction (or fused form) -> positive auxiliary.
NEGATED_FORMS = {
    "isn't": "is",
    "aren't": "are",
    "wasn't": "was",
    "weren't": "were",
    "can't": "can",
    "cannot": "can",
    "couldn't": "could",
    "won't": "will",
    "wouldn't": "would",
    "shan't": "shall",
    "shouldn't": "should",
    "mightn't": "might",
    "mustn't": "must",
    "don't": "do",
    "doesn't": "does",
    "didn't": "did",
    "hasn't": "has",
    "haven't": "have",
    "hadn't": "had",
}

_EDGE_PUNCT = string.punctuation + "“”‘’…"


class NegationRule(Enum):
    AUX_NEGATE = "aux_negate"
    AUX_DENEGATE = "aux_denegate"
    DO_SUPPORT = "do_support"
    SKIPPED = "skipped"


@dataclass(frozen=True)
class NegationResult:
    original: ClaimRecord
    negated_claim: str
    negated_label: VeracityLabel
    rule_applied: NegationRule


def load_verb_lexicon(path: str | Path | None = None) -> frozenset[str]:
    """Verbs eligible for do-support; defaults to the packaged list."""
    if path is None:
        text = resources.files(__package__).joinpath("verbs.txt").read_text("utf-8")
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read verb lexicon {path}: {exc}") from exc
    verbs = set()
    for line in text.splitlines():
        word = line.strip().lower()
        if word and not word.startswith("#"):
            verbs.add(word)
    return frozenset(verbs)


_DEFAULT_LEXICON: frozenset[str] | None = None


def _default_lexicon() -> frozenset[str]:
    global _DEFAULT_LEXICON
    if _DEFAULT_LEXICON is None:
        _DEFAULT_LEXICON = load_verb_lexicon()
    return _DEFAULT_LEXICON


def stem_third_person(verb: str) -> str:
    """Strip a third-person-singular -s: tries -> try, passes -> pass,
    helps -> help.  "-es" is dropped only after a sibilant cluster so
    forms like "causes" and "uses" keep their final e."""
    if verb.endswith("ies") and len(verb) > 3:
        return verb[:-3] + "y"
    if verb.endswith("es") and verb[:-2].endswith(("ss", "x", "z", "ch", "sh")):
        return verb[:-2]
    if verb.endswith("s"):
        return verb[:-1]
    return verb


def _split_token(token: str) -> tuple[str, str, str]:
    """(leading punctuation, core, trailing punctuation)."""
    start, end = 0, len(token)
    while start < end and token[start] in _EDGE_PUNCT:
        start += 1
    while end > start and token[end - 1] in _EDGE_PUNCT:
        end -= 1
    return token[:start], token[start:end], token[end:]


def _match_key(core: str) -> str:
    return core.lower().replace("’", "'")


def _transfer_case(core: str, replacement: str) -> str:
    if core[:1].isupper() and replacement:
        return replacement[0].upper() + replacement[1:]
    return replacement


def negate_claim(
    claim: str,
    lexicon: frozenset[str] | None = None,
    all_match: bool = False,
) -> tuple[str, NegationRule]:
    """Negate one claim; returns (text, rule).  Skipping is a result, not
    an error: the text comes back unchanged with rule SKIPPED.

    `all_match` applies the auxiliary rules at every matching position
    instead of stopping at the first (do-support stays first-match).
    """
    if not claim.strip():
        raise ValidationError("cannot negate an empty claim")
    lexicon = lexicon if lexicon is not None else _default_lexicon()
    tokens = claim.split()
    parts = [_split_token(tok) for tok in tokens]

    out: list[str] = []
    first_rule: NegationRule | None = None
    i = 0
    while i < len(tokens):
        prefix, core, suffix = parts[i]
        key = _match_key(core)
        done = first_rule is not None and not all_match
        if not done and key in NEGATED_FORMS:
            replacement = _transfer_case(core, NEGATED_FORMS[key])
            out.append(prefix + replacement + suffix)
            first_rule = first_rule or NegationRule.AUX_DENEGATE
            i += 1
        elif (
            not done
            and key in POSITIVE_AUX
            and i + 1 < len(tokens)
            and _match_key(parts[i + 1][1]) == "not"
        ):
            not_suffix = parts[i + 1][2]
            out.append(prefix + core + suffix + not_suffix)
            first_rule = first_rule or NegationRule.AUX_DENEGATE
            i += 2
        elif not done and key in POSITIVE_AUX:
            replacement = "cannot" if key == "can" else key + " not"
            out.append(prefix + _transfer_case(core, replacement) + suffix)
            first_rule = first_rule or NegationRule.AUX_NEGATE
            i += 1
        else:
            out.append(tokens[i])
            i += 1

    if first_rule is None:
        for j, (prefix, core, suffix) in enumerate(parts):
            key = _match_key(core)
            if key.endswith("s") and key in lexicon:
                replacement = _transfer_case(core, "does not " + stem_third_person(key))
                out[j] = prefix + replacement + suffix
                first_rule = NegationRule.DO_SUPPORT
                break

    if first_rule is None:
        return claim, NegationRule.SKIPPED
    return " ".join(out), first_rule


def negate_record(
    record: ClaimRecord,
    lexicon: frozenset[str] | None = None,
    all_match: bool = False,
) -> NegationResult:
    negated, rule = negate_claim(record.claim, lexicon=lexicon, all_match=all_match)
    label = record.label if rule is NegationRule.SKIPPED else record.label.flipped()
    return NegationResult(
        original=record, negated_claim=negated, negated_label=label, rule_applied=rule
    )


def negate_dataset(
    ds: Dataset,
    lexicon: frozenset[str] | None = None,
    all_match: bool = False,
) -> tuple[Dataset, list[str]]:
    """Interleave each record with its negation (id + "::neg", label
    flipped, evidence unchanged); returns (augmented dataset, skipped ids)."""
    records: list[ClaimRecord] = []
    skipped: list[str] = []
    for record in ds.records:
        records.append(record)
        result = negate_record(record, lexicon=lexicon, all_match=all_match)
        if result.rule_applied is NegationRule.SKIPPED:
            skipped.append(record.id)
            continue
        records.append(
            ClaimRecord(
                id=record.id + NEG_ID_SUFFIX,
                claim=result.negated_claim,
                evidence=record.evidence,
                label=result.negated_label,
            )
        )
    return Dataset(name=f"{ds.name}-negated", records=tuple(records)), skipped


def _ppl_map(rows) -> dict[str, float]:
    out: dict[str, float] = {}
    for row in rows:
        if hasattr(row, "record"):
            rec_id, ppl = row.record.id, row.perplexity
        elif hasattr(row, "id"):
            rec_id, ppl = row.id, row.perplexity
        else:
            rec_id, ppl = row
        if rec_id in out:
            raise ValidationError(f"duplicate id {rec_id!r} in score rows")
        out[rec_id] = float(ppl)
    return out


def ppl_gap_report(original_scores, negated_scores) -> dict[str, float]:
    """Mean and max |PPL(original) - PPL(negated)| over id-paired rows.

    Negated ids may carry the "::neg" suffix; rows without it are paired
    by identity only when no suffixed rows are present (that covers both
    an augmented-dataset scoring run and two parallel runs).
    """
    orig = _ppl_map(original_scores)
    neg = _ppl_map(negated_scores)
    suffixed = {k: v for k, v in neg.items() if k.endswith(NEG_ID_SUFFIX)}
    if suffixed:
        pairs = {k[: -len(NEG_ID_SUFFIX)]: v for k, v in suffixed.items()}
    else:
        pairs = neg
    if not pairs:
        raise ValidationError("no negated scores to pair")
    diffs = []
    for base_id, neg_ppl in pairs.items():
        if base_id not in orig:
            raise ValidationError(f"negated id {base_id!r} has no original score")
        diffs.append(abs(orig[base_id] - neg_ppl))
    return {
        "mean_abs_diff": sum(diffs) / len(diffs),
        "max_abs_diff": max(diffs),
        "pairs": len(diffs),
    }
