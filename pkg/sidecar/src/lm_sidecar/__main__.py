"""Entry point: ``lm-sidecar`` or ``python -m lm_sidecar``."""

from __future__ import annotations

import sys

import uvicorn

from lm_sidecar.app import create_app
from lm_sidecar.config import ConfigError, Settings


def main() -> int:
    try:
        settings = Settings.from_env()
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    app = create_app(settings)
    uvicorn.run(app, host="0.0.0.0", port=settings.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
