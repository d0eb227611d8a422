"""HTTP behavior: status codes, payload shapes, lifecycle, concurrency."""

import time
from concurrent.futures import ThreadPoolExecutor

from fastapi.testclient import TestClient

from lm_sidecar.app import create_app
from lm_sidecar.config import ModelEntry, Settings

REQ = {"model": "tiny-gpt2", "mode": "causal", "context": "hello", "target": "there"}


def test_healthz_before_startup(settings):
    # Without entering the client context the loader thread never starts.
    bare = TestClient(create_app(settings))
    response = bare.get("/healthz")
    assert response.status_code == 503
    assert response.json()["status"] == "loading"


def test_healthz_when_ready(client):
    response = client.get("/healthz")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["models"] == ["tiny-bert", "tiny-gpt2"]


def test_models_listing(client):
    body = client.get("/v1/models").json()
    by_name = {d["name"]: d for d in body["models"]}
    assert by_name["tiny-gpt2"]["modes"] == ["causal"]
    assert by_name["tiny-bert"]["modes"] == ["masked"]
    for descriptor in by_name.values():
        assert descriptor["window"] == 64
        assert descriptor["join"] == "single-space"


def test_logprobs_causal(client):
    response = client.post("/v1/logprobs", json=REQ)
    assert response.status_code == 200
    body = response.json()
    assert body["token_count"] == len(body["tokens"]) == len(body["logprobs"]) == 6
    assert all(value <= 0.0 for value in body["logprobs"])


def test_logprobs_masked(client):
    response = client.post(
        "/v1/logprobs",
        json={"model": "tiny-bert", "mode": "masked", "context": "the sky", "target": "is blue"},
    )
    assert response.status_code == 200
    body = response.json()
    assert body["tokens"] == ["is", "blue"]
    assert body["token_count"] == 2


def test_context_defaults_to_empty(client):
    response = client.post(
        "/v1/logprobs", json={"model": "tiny-gpt2", "mode": "causal", "target": "abc"}
    )
    assert response.status_code == 200
    assert response.json()["token_count"] == 3


def test_unknown_model_404(client):
    response = client.post("/v1/logprobs", json={**REQ, "model": "nope"})
    assert response.status_code == 404
    assert "nope" in response.json()["detail"]


def test_unsupported_mode_422(client):
    response = client.post("/v1/logprobs", json={**REQ, "mode": "masked"})
    assert response.status_code == 422
    assert "mode" in response.json()["detail"]


def test_invalid_mode_string_422(client):
    response = client.post("/v1/logprobs", json={**REQ, "mode": "windmill"})
    assert response.status_code == 422
    assert "mode" in str(response.json()["detail"])


def test_empty_target_422(client):
    response = client.post("/v1/logprobs", json={**REQ, "target": "  "})
    assert response.status_code == 422
    assert "empty" in response.json()["detail"]


def test_missing_target_422(client):
    response = client.post("/v1/logprobs", json={"model": "tiny-gpt2", "mode": "causal"})
    assert response.status_code == 422


def test_oversized_target_413(client):
    response = client.post("/v1/logprobs", json={**REQ, "target": "x" * 300})
    assert response.status_code == 413
    assert "window" in response.json()["detail"]


def test_identical_requests_identical_bytes(client):
    first = client.post("/v1/logprobs", json=REQ)
    second = client.post("/v1/logprobs", json=REQ)
    assert first.content == second.content


def test_concurrent_requests_agree(client):
    reference = client.post("/v1/logprobs", json=REQ).content
    with ThreadPoolExecutor(max_workers=8) as pool:
        bodies = list(pool.map(lambda _: client.post("/v1/logprobs", json=REQ).content, range(16)))
    assert all(body == reference for body in bodies)


def test_failed_load_surfaces_in_healthz():
    broken = Settings(models=(ModelEntry("bad", "/nonexistent/checkpoint"),))
    with TestClient(create_app(broken)) as client:
        for _ in range(100):
            response = client.get("/healthz")
            if response.json().get("status") == "error":
                break
            time.sleep(0.05)
        assert response.status_code == 503
        assert "bad" in response.json()["detail"] or "nonexistent" in response.json()["detail"]
        scoring = client.post("/v1/logprobs", json=REQ)
        assert scoring.status_code == 503
