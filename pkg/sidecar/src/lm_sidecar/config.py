"""Process configuration read from SIDE_* environment variables."""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

DEFAULT_PORT = 8301
DEFAULT_DEVICE = "cpu"


class ConfigError(ValueError):
    """Raised when the environment describes an unusable configuration."""


@dataclass(frozen=True)
class ModelEntry:
    """One model to serve: a public name plus a local checkpoint path."""

    name: str
    path: str

    @classmethod
    def parse(cls, raw: str) -> "ModelEntry":
        """Parse one SIDE_MODELS item, either ``NAME=PATH`` or bare ``PATH``.

        A bare path is served under its final path component, so
        ``/models/tiny-gpt2`` becomes model ``tiny-gpt2``.
        """
        raw = raw.strip()
        if "=" in raw:
            name, _, path = raw.partition("=")
            name = name.strip()
            path = path.strip()
        else:
            path = raw
            name = Path(raw).name
        if not name or not path:
            raise ConfigError(f"cannot parse model entry {raw!r}; expected NAME=PATH or PATH")
        return cls(name=name, path=path)


@dataclass(frozen=True)
class Settings:
    models: tuple[ModelEntry, ...]
    port: int = DEFAULT_PORT
    device: str = DEFAULT_DEVICE
    max_len: int | None = None

    def __post_init__(self) -> None:
        if not self.models:
            raise ConfigError("at least one model must be configured")
        names = [entry.name for entry in self.models]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate model names in {names}")
        if not 1 <= self.port <= 65535:
            raise ConfigError(f"port {self.port} out of range")
        # A window below 2 cannot hold a BOS marker plus one target token.
        if self.max_len is not None and self.max_len < 2:
            raise ConfigError(f"SIDE_MAXLEN must be at least 2, got {self.max_len}")

    @classmethod
    def from_env(cls, env: Mapping[str, str] | None = None) -> "Settings":
        """Build settings from SIDE_MODELS, SIDE_PORT, SIDE_DEVICE, SIDE_MAXLEN."""
        if env is None:
            env = os.environ
        raw_models = env.get("SIDE_MODELS", "").strip()
        if not raw_models:
            raise ConfigError(
                "SIDE_MODELS is not set; expected a comma separated list of NAME=PATH or PATH"
            )
        entries = tuple(ModelEntry.parse(item) for item in raw_models.split(",") if item.strip())
        port = _int_env(env, "SIDE_PORT", DEFAULT_PORT)
        max_len = _int_env(env, "SIDE_MAXLEN", None)
        device = env.get("SIDE_DEVICE", DEFAULT_DEVICE).strip() or DEFAULT_DEVICE
        return cls(models=entries, port=port, device=device, max_len=max_len)


def _int_env(env: Mapping[str, str], key: str, default: int | None) -> int | None:
    raw = env.get(key, "").strip()
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key} must be an integer, got {raw!r}") from None
