"""HTTP sidecar serving per-token log-probabilities from transformer LMs."""

from lm_sidecar.config import ConfigError, ModelEntry, Settings
from lm_sidecar.serving import (
    EmptyTargetError,
    ModelLoadError,
    ServedModel,
    TargetTooLongError,
    UnsupportedModeError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "EmptyTargetError",
    "ModelEntry",
    "ModelLoadError",
    "ServedModel",
    "Settings",
    "TargetTooLongError",
    "UnsupportedModeError",
]
