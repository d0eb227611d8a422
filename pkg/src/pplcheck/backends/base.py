"""Scoring backend interface.

A backend turns (context, target) text into per-token natural-log
probabilities for the target only.  Context tokens condition the
distribution but are never scored themselves.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum

from ..errors import EmptyTargetError, UnsupportedModeError, ValidationError


class ScoringMode(Enum):
    CAUSAL = "causal"
    MASKED = "masked"

    @classmethod
    def parse(cls, raw: str) -> "ScoringMode":
        try:
            return cls(raw.strip().lower())
        except ValueError:
            raise ValidationError(
                f"unknown scoring mode {raw!r}; expected causal or masked"
            ) from None


@dataclass(frozen=True)
class TokenLogProbs:
    """Per-token natural-log probabilities for the target text.

    `tokens` are the backend's own target tokenization; context tokens are
    excluded.  Every log probability must be finite and <= 0.
    """

    tokens: tuple[str, ...]
    logprobs: tuple[float, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.logprobs):
            raise ValidationError(
                f"token/logprob length mismatch: {len(self.tokens)} vs {len(self.logprobs)}"
            )
        for lp in self.logprobs:
            if not math.isfinite(lp):
                raise ValidationError(f"non-finite log probability {lp!r}")
            if lp > 0.0:
                raise ValidationError(f"positive log probability {lp!r}")

    @property
    def token_count(self) -> int:
        return len(self.tokens)

    def mean_logprob(self) -> float:
        if not self.logprobs:
            raise EmptyTargetError("no target tokens to average")
        return sum(self.logprobs) / len(self.logprobs)


class LmBackend(ABC):
    """Language model scoring interface.

    Implementations must be safe for concurrent `score` calls.
    """

    @property
    @abstractmethod
    def backend_id(self) -> str:
        """Short backend family name, e.g. 'ngram' or 'remote'."""

    @property
    @abstractmethod
    def model_name(self) -> str:
        """Identifier of the concrete model being scored against."""

    @property
    @abstractmethod
    def tokenizer_note(self) -> str:
        """Human-readable note on how text is tokenized and joined."""

    def supports(self, mode: ScoringMode) -> bool:
        return mode is ScoringMode.CAUSAL

    def score(self, mode: ScoringMode, context: str, target: str) -> TokenLogProbs:
        """Score `target` under `mode`, conditioned on `context`.

        Raises UnsupportedModeError if the mode is not supported and
        EmptyTargetError if the target yields zero tokens.
        """
        if not self.supports(mode):
            raise UnsupportedModeError(
                f"backend {self.backend_id!r} ({self.model_name}) does not support"
                f" mode {mode.value!r}"
            )
        if mode is ScoringMode.CAUSAL:
            return self.score_causal(context, target)
        return self.score_masked(context, target)

    @abstractmethod
    def score_causal(self, context: str, target: str) -> TokenLogProbs:
        ...

    def score_masked(self, context: str, target: str) -> TokenLogProbs:
        raise UnsupportedModeError(
            f"backend {self.backend_id!r} ({self.model_name}) does not support mode 'masked'"
        )
