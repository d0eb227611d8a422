"""Additive-smoothed n-gram language model over whitespace tokens.

Small, dependency-free causal backend.  It exists so the scoring and
classification pipeline can run end to end with exactly reproducible
numbers; neural backends plug in through the same interface.

Model conventions:
  * tokenization lowercases then splits on whitespace
  * each training line is padded with order-1 sentence-start markers
  * the start marker participates in contexts only and is not part of
    the smoothing vocabulary
  * unknown tokens (context or target) map to the reserved "<unk>" entry
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path
from typing import Iterable

from ..errors import EmptyTargetError, InputError, ParseError, ValidationError
from .base import LmBackend, TokenLogProbs

UNK = "<unk>"
BOS = "<s>"

_FORMAT = "pplcheck-ngram"
_VERSION = 1


def tokenize(text: str) -> list[str]:
    return text.lower().split()


class NgramModel(LmBackend):
    """Order-n model with add-alpha smoothing.

    p(t | ctx) = (count(ctx, t) + alpha) / (count(ctx, .) + alpha * |V|)

    A context never seen in training therefore backs off to the uniform
    distribution 1/|V|.
    """

    def __init__(
        self,
        order: int,
        alpha: float,
        vocab: Iterable[str],
        counts: dict[tuple[str, ...], dict[str, int]] | None = None,
    ):
        if order < 1:
            raise ValidationError(f"order must be >= 1, got {order}")
        if not (alpha > 0):
            raise ValidationError(f"alpha must be > 0, got {alpha}")
        self.order = order
        self.alpha = float(alpha)
        vocab_set = set(vocab)
        vocab_set.discard(BOS)
        vocab_set.add(UNK)
        self.vocab: tuple[str, ...] = tuple(sorted(vocab_set))
        self._vocab_set = frozenset(self.vocab)
        self.counts: dict[tuple[str, ...], dict[str, int]] = counts or {}
        self._context_totals = {
            ctx: sum(successors.values()) for ctx, successors in self.counts.items()
        }
        self._fingerprint = hashlib.sha256(
            self._payload_json().encode("utf-8")
        ).hexdigest()[:16]

    # --- LmBackend interface ------------------------------------------

    @property
    def backend_id(self) -> str:
        return "ngram"

    @property
    def model_name(self) -> str:
        return f"ngram:{self._fingerprint}"

    @property
    def tokenizer_note(self) -> str:
        return "whitespace-lowercase"

    def score_causal(self, context: str, target: str) -> TokenLogProbs:
        target_tokens = tokenize(target)
        if not target_tokens:
            raise EmptyTargetError("target has no tokens after tokenization")
        history = [BOS] * (self.order - 1) + [self._to_vocab(t) for t in tokenize(context)]
        logprobs = []
        for tok in target_tokens:
            mapped = self._to_vocab(tok)
            ctx = tuple(history[len(history) - (self.order - 1):]) if self.order > 1 else ()
            logprobs.append(math.log(self._prob(ctx, mapped)))
            history.append(mapped)
        return TokenLogProbs(tokens=tuple(target_tokens), logprobs=tuple(logprobs))

    # --- probabilities --------------------------------------------------

    def _to_vocab(self, token: str) -> str:
        return token if token in self._vocab_set else UNK

    def _prob(self, ctx: tuple[str, ...], token: str) -> float:
        successors = self.counts.get(ctx)
        v = len(self.vocab)
        if successors is None:
            return 1.0 / v
        count = successors.get(token, 0)
        total = self._context_totals[ctx]
        return (count + self.alpha) / (total + self.alpha * v)

    def prob(self, context_tokens: Iterable[str], token: str) -> float:
        """Conditional probability for already-tokenized input; test hook."""
        ctx_list = [self._to_vocab(t) for t in context_tokens]
        if self.order > 1:
            ctx_list = ([BOS] * (self.order - 1) + ctx_list)[-(self.order - 1):]
            ctx = tuple(ctx_list)
        else:
            ctx = ()
        return self._prob(ctx, self._to_vocab(token))

    # --- persistence -----------------------------------------------------

    def _payload(self) -> dict:
        counts_json = {
            " ".join(ctx): dict(sorted(successors.items()))
            for ctx, successors in self.counts.items()
        }
        return {
            "format": _FORMAT,
            "version": _VERSION,
            "order": self.order,
            "alpha": self.alpha,
            "vocab": list(self.vocab),
            "counts": counts_json,
        }

    def _payload_json(self) -> str:
        return json.dumps(self._payload(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))

    def save(self, path: str | Path) -> None:
        try:
            Path(path).write_text(self._payload_json() + "\n", encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot write model {path}: {exc}") from exc

    @classmethod
    def load(cls, path: str | Path) -> "NgramModel":
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise InputError(f"cannot read model {path}: {exc}") from exc
        try:
            payload = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(str(path), exc.lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(payload, dict) or payload.get("format") != _FORMAT:
            raise ParseError(str(path), 1, f"not a {_FORMAT} file")
        if payload.get("version") != _VERSION:
            raise ParseError(str(path), 1, f"unsupported version {payload.get('version')!r}")
        try:
            counts = {
                tuple(ctx.split(" ")) if ctx else (): {
                    str(tok): int(n) for tok, n in successors.items()
                }
                for ctx, successors in payload["counts"].items()
            }
            return cls(
                order=int(payload["order"]),
                alpha=float(payload["alpha"]),
                vocab=payload["vocab"],
                counts=counts,
            )
        except (KeyError, TypeError, AttributeError) as exc:
            raise ParseError(str(path), 1, f"malformed model payload: {exc}") from exc


def train_ngram(
    corpus: str | Iterable[str],
    order: int,
    alpha: float = 1.0,
    extra_vocab: Iterable[str] = (),
) -> NgramModel:
    """Count n-grams over a corpus given as raw text or an iterable of lines.

    Each line is an independent sequence: padded with order-1 start
    markers, no cross-line contexts.  An empty corpus with a declared
    `extra_vocab` yields the uniform model over that vocabulary.
    """
    if order < 1:
        raise ValidationError(f"order must be >= 1, got {order}")
    lines = corpus.splitlines() if isinstance(corpus, str) else list(corpus)

    vocab: set[str] = set(extra_vocab)
    vocab.discard(BOS)
    counts: dict[tuple[str, ...], dict[str, int]] = {}
    for line in lines:
        tokens = tokenize(line)
        if not tokens:
            continue
        vocab.update(tokens)
        padded = [BOS] * (order - 1) + tokens
        for i in range(order - 1, len(padded)):
            ctx = tuple(padded[i - (order - 1): i])
            tok = padded[i]
            counts.setdefault(ctx, {})
            counts[ctx][tok] = counts[ctx].get(tok, 0) + 1
    return NgramModel(order=order, alpha=alpha, vocab=vocab, counts=counts)
