"""Run the service on a real socket for integration tests."""

from __future__ import annotations

import threading
import time
from contextlib import contextmanager

import httpx
import uvicorn

from lm_sidecar.app import create_app
from lm_sidecar.config import Settings


@contextmanager
def serve(settings: Settings, timeout: float = 120.0):
    """Start uvicorn on an ephemeral port, yield the base URL, then stop it."""
    config = uvicorn.Config(create_app(settings), host="127.0.0.1", port=0, log_level="warning")
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, name="uvicorn", daemon=True)
    thread.start()
    try:
        deadline = time.monotonic() + timeout
        while not server.started:
            if time.monotonic() > deadline:
                raise TimeoutError("server did not start")
            time.sleep(0.02)
        port = server.servers[0].sockets[0].getsockname()[1]
        base_url = f"http://127.0.0.1:{port}"
        with httpx.Client(base_url=base_url) as probe:
            while True:
                if time.monotonic() > deadline:
                    raise TimeoutError("service did not become healthy")
                response = probe.get("/healthz")
                if response.status_code == 200:
                    break
                time.sleep(0.05)
        yield base_url
    finally:
        server.should_exit = True
        thread.join(timeout=10.0)
