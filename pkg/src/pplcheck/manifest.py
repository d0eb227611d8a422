"""Run manifests and hashing helpers.

Every CLI command that writes an artifact also writes a sibling
`<artifact>.manifest.json` recording the command, its full configuration,
input file hashes, the tool version, and a timestamp.  Timestamps honor
SOURCE_DATE_EPOCH so archived runs can be reproduced byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from pathlib import Path

from .errors import InputError

TOOL_NAME = "pplcheck"


def tool_version() -> str:
    try:
        from importlib.metadata import version

        return version(TOOL_NAME)
    except Exception:
        return "0.0.0+unknown"


def canonical_json(obj) -> str:
    """Stable serialization used for hashing: sorted keys, no whitespace."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    try:
        with Path(path).open("rb") as fh:
            for chunk in iter(lambda: fh.read(1 << 20), b""):
                digest.update(chunk)
    except OSError as exc:
        raise InputError(f"cannot hash {path}: {exc}") from exc
    return digest.hexdigest()


def now_iso() -> str:
    """Current UTC time, or the SOURCE_DATE_EPOCH instant when set."""
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch is not None:
        moment = datetime.fromtimestamp(int(epoch), tz=timezone.utc)
    else:
        moment = datetime.now(tz=timezone.utc)
    return moment.replace(microsecond=0).isoformat().replace("+00:00", "Z")


def manifest_path_for(artifact: str | Path) -> Path:
    artifact = Path(artifact)
    return artifact.with_name(artifact.name + ".manifest.json")


def write_manifest(
    artifact: str | Path,
    command: str,
    config: dict,
    inputs: dict[str, str | Path],
    outputs: dict[str, str | Path] | None = None,
) -> Path:
    """Write the manifest next to `artifact`; `inputs`/`outputs` map
    role -> path and are hashed in place."""

    def hashed(paths: dict[str, str | Path]) -> dict:
        return {
            role: {"path": str(path), "sha256": sha256_file(path)}
            for role, path in paths.items()
        }

    payload = {
        "command": command,
        "config": config,
        "inputs": hashed(inputs),
        "outputs": hashed(outputs or {}),
        "tool": {"name": TOOL_NAME, "version": tool_version()},
        "created_at": now_iso(),
    }
    out = manifest_path_for(artifact)
    try:
        out.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot write manifest {out}: {exc}") from exc
    return out
