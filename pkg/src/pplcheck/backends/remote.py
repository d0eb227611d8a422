"""HTTP client backend for a model-serving sidecar.

Speaks a small JSON protocol:

    POST {base_url}/v1/logprobs  {"model", "mode", "context", "target"}
        -> {"tokens": [...], "logprobs": [...], "token_count": N}
    GET  {base_url}/v1/models    -> {"models": [{"name", "modes", ...}]}
    GET  {base_url}/healthz      -> 200 when ready, 503 while loading

Validation failures on the server (unknown model, bad mode, empty or
over-length target) surface as the matching local exceptions; transport
errors and 5xx responses are retried with exponential backoff before
giving up with BackendUnavailableError.
"""

from __future__ import annotations

import threading
import time

import httpx

from ..errors import (
    BackendUnavailableError,
    EmptyTargetError,
    UnsupportedModeError,
    ValidationError,
)
from .base import LmBackend, ScoringMode, TokenLogProbs


def _detail(response: httpx.Response) -> str:
    try:
        body = response.json()
        if isinstance(body, dict) and "detail" in body:
            return str(body["detail"])
    except ValueError:
        pass
    return response.text.strip() or f"HTTP {response.status_code}"


class RemoteBackend(LmBackend):
    """Scores text against one named model behind a sidecar server."""

    def __init__(
        self,
        base_url: str,
        model: str,
        timeout: float = 60.0,
        max_in_flight: int = 4,
        retries: int = 2,
        backoff: float = 0.25,
    ):
        if max_in_flight < 1:
            raise ValidationError(f"max_in_flight must be >= 1, got {max_in_flight}")
        if retries < 0:
            raise ValidationError(f"retries must be >= 0, got {retries}")
        self.base_url = base_url.rstrip("/")
        self.model = model
        self.retries = retries
        self.backoff = backoff
        self._client = httpx.Client(base_url=self.base_url, timeout=timeout)
        self._slots = threading.BoundedSemaphore(max_in_flight)

    # --- LmBackend interface ------------------------------------------

    @property
    def backend_id(self) -> str:
        return "remote"

    @property
    def model_name(self) -> str:
        return self.model

    @property
    def tokenizer_note(self) -> str:
        return "remote:single-space-join"

    def supports(self, mode: ScoringMode) -> bool:
        # The server is authoritative; a bad mode comes back as 422.
        return True

    def score_causal(self, context: str, target: str) -> TokenLogProbs:
        return self._score(ScoringMode.CAUSAL, context, target)

    def score_masked(self, context: str, target: str) -> TokenLogProbs:
        return self._score(ScoringMode.MASKED, context, target)

    # --- HTTP plumbing ---------------------------------------------------

    def _score(self, mode: ScoringMode, context: str, target: str) -> TokenLogProbs:
        payload = {
            "model": self.model,
            "mode": mode.value,
            "context": context,
            "target": target,
        }
        response = self._request("POST", "/v1/logprobs", json=payload)
        if response.status_code != 200:
            raise self._error_for(response)
        try:
            body = response.json()
            result = TokenLogProbs(
                tokens=tuple(str(t) for t in body["tokens"]),
                logprobs=tuple(float(x) for x in body["logprobs"]),
            )
            declared = int(body["token_count"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailableError(
                f"malformed response from {self.base_url}: {exc}"
            ) from exc
        if declared != result.token_count:
            raise BackendUnavailableError(
                f"server token_count {declared} does not match"
                f" {result.token_count} returned tokens"
            )
        return result

    def _error_for(self, response: httpx.Response) -> Exception:
        detail = _detail(response)
        status = response.status_code
        if status == 422:
            if "mode" in detail.lower():
                return UnsupportedModeError(detail)
            if "empty" in detail.lower():
                return EmptyTargetError(detail)
            return ValidationError(detail)
        if status in (404, 413) or 400 <= status < 500:
            return ValidationError(f"HTTP {status}: {detail}")
        return BackendUnavailableError(f"HTTP {status}: {detail}")

    def _request(self, method: str, path: str, **kwargs) -> httpx.Response:
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            if attempt:
                time.sleep(self.backoff * (2 ** (attempt - 1)))
            try:
                with self._slots:
                    response = self._client.request(method, path, **kwargs)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500 or response.status_code == 503:
                last_error = BackendUnavailableError(
                    f"HTTP {response.status_code}: {_detail(response)}"
                )
                continue
            return response
        raise BackendUnavailableError(
            f"cannot reach sidecar at {self.base_url}: {last_error}"
        )

    # --- discovery -------------------------------------------------------

    def list_models(self) -> list[dict]:
        response = self._request("GET", "/v1/models")
        if response.status_code != 200:
            raise self._error_for(response)
        body = response.json()
        models = body.get("models", body) if isinstance(body, dict) else body
        if not isinstance(models, list):
            raise BackendUnavailableError(f"malformed model listing from {self.base_url}")
        return models

    def health(self) -> bool:
        """True when the server reports ready.  Raises if unreachable."""
        try:
            response = self._client.get("/healthz")
        except httpx.HTTPError as exc:
            raise BackendUnavailableError(
                f"cannot reach sidecar at {self.base_url}: {exc}"
            ) from exc
        return response.status_code == 200

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "RemoteBackend":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
