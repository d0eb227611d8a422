"""Shared fixtures: tiny offline checkpoints and a ready HTTP client.

Both checkpoints are built from scratch at session start so the suite runs
with no network and no model cache. The GPT-2 variant uses a byte-level
tokenizer with an empty merge table, which gives an exact one-token-per-byte
oracle for token counts; the BERT variant uses a closed word-level vocabulary
so whitespace word counts are the oracle.
"""

from __future__ import annotations

import time

import pytest
import torch
from fastapi.testclient import TestClient
from tokenizers import Tokenizer, decoders, models, pre_tokenizers
from transformers import (
    BertConfig,
    BertForMaskedLM,
    GPT2Config,
    GPT2LMHeadModel,
    PreTrainedTokenizerFast,
)

from lm_sidecar.app import create_app
from lm_sidecar.config import ModelEntry, Settings

# Every word is in the tiny BERT vocabulary, so masked token counts are
# predictable from whitespace splits.
WORDS = [
    "the", "sky", "is", "blue", "green", "water", "wet", "rocks",
    "hard", "wind", "storm", "rain", "sun", "cloud", "red",
]

WINDOW = 64


def build_tiny_gpt2(path) -> None:
    alphabet = pre_tokenizers.ByteLevel.alphabet()
    vocab = {ch: i for i, ch in enumerate(sorted(alphabet))}
    vocab["<|endoftext|>"] = len(vocab)
    tok = Tokenizer(models.BPE(vocab=vocab, merges=[]))
    tok.pre_tokenizer = pre_tokenizers.ByteLevel(add_prefix_space=False)
    tok.decoder = decoders.ByteLevel()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        bos_token="<|endoftext|>",
        eos_token="<|endoftext|>",
        unk_token="<|endoftext|>",
    )
    fast.save_pretrained(path)
    torch.manual_seed(0)
    config = GPT2Config(
        vocab_size=len(vocab),
        n_positions=WINDOW,
        n_embd=32,
        n_layer=2,
        n_head=2,
        bos_token_id=vocab["<|endoftext|>"],
        eos_token_id=vocab["<|endoftext|>"],
    )
    GPT2LMHeadModel(config).save_pretrained(path)


def build_tiny_bert(path) -> None:
    specials = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]
    vocab = {token: i for i, token in enumerate(specials + WORDS)}
    tok = Tokenizer(models.WordPiece(vocab=vocab, unk_token="[UNK]"))
    tok.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tok,
        pad_token="[PAD]",
        unk_token="[UNK]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )
    fast.save_pretrained(path)
    torch.manual_seed(1)
    config = BertConfig(
        vocab_size=len(vocab),
        hidden_size=32,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=64,
        max_position_embeddings=WINDOW,
    )
    BertForMaskedLM(config).save_pretrained(path)


@pytest.fixture(scope="session")
def tiny_gpt2_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("tiny-gpt2")
    build_tiny_gpt2(path)
    return path


@pytest.fixture(scope="session")
def tiny_bert_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("tiny-bert")
    build_tiny_bert(path)
    return path


@pytest.fixture(scope="session")
def settings(tiny_gpt2_dir, tiny_bert_dir) -> Settings:
    return Settings(
        models=(
            ModelEntry("tiny-gpt2", str(tiny_gpt2_dir)),
            ModelEntry("tiny-bert", str(tiny_bert_dir)),
        )
    )


def wait_healthy(client: TestClient, timeout: float = 30.0) -> None:
    deadline = time.monotonic() + timeout
    while time.monotonic() < deadline:
        response = client.get("/healthz")
        if response.status_code == 200:
            return
        if response.json().get("status") == "error":
            raise RuntimeError(f"model load failed: {response.json()}")
        time.sleep(0.05)
    raise TimeoutError("service did not become healthy")


@pytest.fixture(scope="session")
def client(settings):
    with TestClient(create_app(settings)) as c:
        wait_healthy(c)
        yield c


_CRITERIA = (
    ("test_s1", "S1 scoring contract on random strings"),
    ("test_s2", "S2 real checkpoint spot check"),
    ("test_s3", "S3 full-scale reproduction"),
)


def pytest_terminal_summary(terminalreporter):
    """Print one pass/fail/skip line per shipped guarantee."""
    lines = []
    for prefix, title in _CRITERIA:
        verdict = None
        for status in ("passed", "failed", "error", "skipped"):
            for report in terminalreporter.stats.get(status, []):
                nodeid = getattr(report, "nodeid", "")
                if "test_acceptance" in nodeid and f"::{prefix}" in nodeid:
                    verdict = status.upper() if status != "error" else "FAILED"
                    break
            if verdict:
                break
        if verdict:
            lines.append(f"  {verdict:7s} {title}")
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
