"""End-to-end: the pplcheck CLI scoring claims through a live sidecar socket.

This is the one place the two packages meet, and they meet only over HTTP:
the CLI runs as a subprocess pointed at ``remote:http://...``.
"""

import json
import shutil
import subprocess

import httpx
import pytest

from live_server import serve

pytestmark = pytest.mark.skipif(
    shutil.which("pplcheck") is None, reason="pplcheck CLI is not installed"
)

RECORDS = [
    {"id": "c1", "claim": "the sky is blue", "evidence": "the sky is blue today", "label": "SUPPORTED"},
    {"id": "c2", "claim": "water is wet", "evidence": "water is wet", "label": "SUPPORTED"},
    {"id": "c3", "claim": "rocks are hard", "evidence": "rocks are hard", "label": "SUPPORTED"},
    {"id": "c4", "claim": "zqj xvk wbboro", "evidence": "the sky is blue", "label": "UNSUPPORTED"},
    {"id": "c5", "claim": "qqq zzz xxxxx", "evidence": "water is wet", "label": "UNSUPPORTED"},
    {"id": "c6", "claim": "vvv kkk jjjjj", "evidence": "rocks are hard", "label": "UNSUPPORTED"},
]


@pytest.fixture(scope="module")
def base_url(settings):
    with serve(settings) as url:
        yield url


def test_wire_protocol_from_plain_client(base_url):
    with httpx.Client(base_url=base_url) as client:
        descriptors = client.get("/v1/models").json()["models"]
        assert {d["name"] for d in descriptors} == {"tiny-bert", "tiny-gpt2"}
        response = client.post(
            "/v1/logprobs",
            json={"model": "tiny-gpt2", "mode": "causal", "context": "ab", "target": "cd"},
        )
        assert response.status_code == 200
        assert response.json()["token_count"] == 3


def test_cli_scores_and_evaluates_over_http(base_url, tmp_path):
    dataset = tmp_path / "claims.jsonl"
    dataset.write_text("\n".join(json.dumps(r) for r in RECORDS) + "\n")
    scores = tmp_path / "scores.jsonl"
    report = tmp_path / "report.json"

    result = subprocess.run(
        [
            "pplcheck", "score",
            "--dataset", str(dataset),
            "--backend", f"remote:{base_url}",
            "--model", "tiny-gpt2",
            "--jobs", "3",
            "--out", str(scores),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    rows = [json.loads(line) for line in scores.read_text().splitlines()]
    header, body = rows[0], rows[1:]
    assert header["backend"] == "remote"
    assert header["model"] == "tiny-gpt2"
    assert len(body) == len(RECORDS)
    assert all(row["perplexity"] > 0 for row in body)

    result = subprocess.run(
        [
            "pplcheck", "run",
            "--scores", str(scores),
            "--shots", "2",
            "--seeds", "13",
            "--out", str(report),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    loaded = json.loads(report.read_text())
    assert loaded["per_seed"][0]["n_test"] == len(RECORDS) - 2


def test_cli_masked_mode_over_http(base_url, tmp_path):
    dataset = tmp_path / "claims.jsonl"
    dataset.write_text(json.dumps(RECORDS[0]) + "\n")
    scores = tmp_path / "scores.jsonl"
    result = subprocess.run(
        [
            "pplcheck", "score",
            "--dataset", str(dataset),
            "--backend", f"remote:{base_url}",
            "--model", "tiny-bert",
            "--mode", "masked",
            "--out", str(scores),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode == 0, result.stderr
    rows = [json.loads(line) for line in scores.read_text().splitlines()]
    assert rows[0]["mode"] == "masked"
    assert len(rows) == 2


def test_cli_unknown_model_fails_cleanly(base_url, tmp_path):
    dataset = tmp_path / "claims.jsonl"
    dataset.write_text(json.dumps(RECORDS[0]) + "\n")
    result = subprocess.run(
        [
            "pplcheck", "score",
            "--dataset", str(dataset),
            "--backend", f"remote:{base_url}",
            "--model", "ghost",
            "--out", str(tmp_path / "scores.jsonl"),
        ],
        capture_output=True,
        text=True,
    )
    assert result.returncode != 0
    assert "error:" in result.stderr
