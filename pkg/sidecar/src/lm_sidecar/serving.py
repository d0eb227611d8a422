"""Model loading and per-token log-probability computation.

A :class:`ServedModel` wraps one checkpoint and exposes exactly one scoring
mode, decided by the architecture recorded in its config: causal LMs score a
target continuation with a single forward pass, masked LMs score each target
position with the pseudo-log-likelihood recipe (mask one position at a time,
never a context position).
"""

from __future__ import annotations

import math
import threading
from typing import Literal, Sequence

import torch
from transformers import (
    AutoConfig,
    AutoModelForCausalLM,
    AutoModelForMaskedLM,
    AutoTokenizer,
)

Mode = Literal["causal", "masked"]

# Independent requests batch masked positions in fixed-size chunks so repeated
# requests take the identical numeric path.
_MASK_CHUNK = 8


class ModelLoadError(RuntimeError):
    """Raised when a checkpoint cannot be loaded or is unusable for scoring."""


class UnsupportedModeError(ValueError):
    """Raised when a model is asked for a scoring mode it does not implement."""


class EmptyTargetError(ValueError):
    """Raised when the target segment contains no scoreable tokens."""


class TargetTooLongError(ValueError):
    """Raised when the target alone cannot fit in the model window."""


class ServedModel:
    """One loaded checkpoint plus its tokenizer, ready to score targets.

    Scoring is read-only with respect to the weights, so a single instance may
    be shared across request threads.
    """

    def __init__(self, name: str, path: str, device: str = "cpu", max_len: int | None = None):
        self.name = name
        self.path = path
        self.device = torch.device(device)
        try:
            config = AutoConfig.from_pretrained(path)
        except Exception as exc:
            raise ModelLoadError(f"cannot read model config at {path!r}: {exc}") from exc

        arch = (config.architectures or [""])[0]
        if "MaskedLM" in arch:
            self.mode: Mode = "masked"
            loader = AutoModelForMaskedLM
        elif "CausalLM" in arch or "LMHead" in arch:
            self.mode = "causal"
            loader = AutoModelForCausalLM
        else:
            raise ModelLoadError(
                f"architecture {arch!r} of {path!r} is neither causal nor masked"
            )

        try:
            self.tokenizer = AutoTokenizer.from_pretrained(path)
            self.model = loader.from_pretrained(path).to(self.device)
        except Exception as exc:
            raise ModelLoadError(f"cannot load model at {path!r}: {exc}") from exc
        self.model.eval()

        native = getattr(config, "n_positions", None) or getattr(
            config, "max_position_embeddings", None
        )
        if not native:
            raise ModelLoadError(f"model at {path!r} does not declare a position limit")
        self.window = min(native, max_len) if max_len else int(native)

        if self.mode == "causal":
            self._bos_id = self.tokenizer.bos_token_id
            if self._bos_id is None:
                self._bos_id = self.tokenizer.eos_token_id
            if self._bos_id is None:
                raise ModelLoadError(
                    f"causal model at {path!r} has no BOS or EOS token to anchor scoring"
                )
        else:
            missing = [
                attr
                for attr in ("cls_token_id", "sep_token_id", "mask_token_id")
                if getattr(self.tokenizer, attr) is None
            ]
            if missing:
                raise ModelLoadError(f"masked model at {path!r} lacks {', '.join(missing)}")

        # Serializes forwards per model; concurrency across models still holds
        # and the HTTP layer bounds concurrent scoring anyway.
        self._lock = threading.Lock()

    def descriptor(self) -> dict:
        return {
            "name": self.name,
            "modes": [self.mode],
            "window": self.window,
            "join": "single-space",
        }

    def logprobs(self, mode: str, context: str, target: str) -> tuple[list[str], list[float]]:
        """Score ``target`` conditioned on ``context``.

        Returns the target's token strings and their natural-log probabilities,
        in target order. The context is never scored; when it exceeds the
        window budget its oldest tokens are dropped from the left.
        """
        if mode != self.mode:
            raise UnsupportedModeError(f"model {self.name!r} does not support mode {mode!r}")
        if not target.strip():
            raise EmptyTargetError("empty target")

        ctx_ids = self._encode(context) if context else []
        # The single-space join makes the context/target boundary explicit for
        # byte-level tokenizers; word-level tokenizers strip it again.
        tgt_text = " " + target if context else target
        tgt_ids = self._encode(tgt_text)
        if not tgt_ids:
            raise EmptyTargetError("target is empty after tokenization")

        if self.mode == "causal":
            values = self._causal_logprobs(ctx_ids, tgt_ids)
        else:
            values = self._masked_logprobs(ctx_ids, tgt_ids)
        tokens = self.tokenizer.convert_ids_to_tokens(tgt_ids)
        return tokens, values

    def _encode(self, text: str) -> list[int]:
        return self.tokenizer.encode(text, add_special_tokens=False)

    def _fit_context(self, ctx_ids: list[int], reserved: int) -> list[int]:
        """Drop context tokens from the left until the request fits the window."""
        budget = self.window - reserved
        if budget < 0:
            raise TargetTooLongError(
                f"target needs {reserved} tokens but the window of {self.name!r} "
                f"is {self.window}"
            )
        if len(ctx_ids) > budget:
            return ctx_ids[len(ctx_ids) - budget :]
        return ctx_ids

    def _causal_logprobs(self, ctx_ids: list[int], tgt_ids: list[int]) -> list[float]:
        # BOS always survives truncation so the first kept token is predicted
        # from a real position.
        ctx_ids = self._fit_context(ctx_ids, reserved=1 + len(tgt_ids))
        ids = [self._bos_id] + ctx_ids + tgt_ids
        start = 1 + len(ctx_ids)
        with self._lock, torch.inference_mode():
            logits = self.model(input_ids=self._tensor([ids])).logits[0]
        # Position p is predicted by the logits at p-1.
        rows = torch.log_softmax(logits[start - 1 : start - 1 + len(tgt_ids)], dim=-1)
        picked = rows[torch.arange(len(tgt_ids)), torch.tensor(tgt_ids, device=self.device)]
        return [float(v) for v in picked]

    def _masked_logprobs(self, ctx_ids: list[int], tgt_ids: list[int]) -> list[float]:
        tok = self.tokenizer
        ctx_ids = self._fit_context(ctx_ids, reserved=2 + len(tgt_ids))
        base = [tok.cls_token_id] + ctx_ids + tgt_ids + [tok.sep_token_id]
        offset = 1 + len(ctx_ids)

        # One variant per target position, true token replaced by the mask.
        variants = []
        for i in range(len(tgt_ids)):
            ids = list(base)
            ids[offset + i] = tok.mask_token_id
            variants.append(ids)

        values: list[float] = []
        with self._lock, torch.inference_mode():
            for lo in range(0, len(variants), _MASK_CHUNK):
                chunk = variants[lo : lo + _MASK_CHUNK]
                logits = self.model(input_ids=self._tensor(chunk)).logits
                for row in range(len(chunk)):
                    pos = offset + lo + row
                    dist = torch.log_softmax(logits[row, pos], dim=-1)
                    values.append(float(dist[tgt_ids[lo + row]]))
        return values

    def _tensor(self, rows: Sequence[Sequence[int]]) -> torch.Tensor:
        return torch.tensor(rows, dtype=torch.long, device=self.device)


def perplexity(logprobs: Sequence[float]) -> float:
    """Convenience for spot checks: exp of the negated mean log-probability."""
    if not logprobs:
        raise ValueError("no logprobs")
    return math.exp(-sum(logprobs) / len(logprobs))
