"""Temp file and artifact management for MCP tool outputs.

Handles:
- Managed per-call run directories for verdict JSONL files
- Cleanup policy (auto-delete vs WIKISR_KEEP_FILES)
- Inline vs artifact decision based on file size
"""

from __future__ import annotations

import os
import shutil
import uuid
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any

ENV_ARTIFACT_DIR = "WIKISR_ARTIFACT_DIR"
ENV_KEEP_FILES = "WIKISR_KEEP_FILES"

DEFAULT_ARTIFACT_DIR = Path.home() / ".wikisr" / "mcp_tmp"

# Files smaller than this are inlined in data; larger become artifacts
MAX_INLINE_BYTES = 64 * 1024


@dataclass
class Artifact:
    """File artifact produced by a tool (e.g. verdicts from wikisr.filter)."""

    type: str = "file"
    path: str = ""
    row_count: int = 0
    size_bytes: int = 0
    mime: str = "application/x-ndjson"

    def to_dict(self) -> dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if v}


def keep_files() -> bool:
    return os.environ.get(ENV_KEEP_FILES, "").lower() in ("1", "true", "yes")


def get_artifact_dir() -> Path:
    """Get or create the managed artifact directory."""
    artifact_dir = Path(os.environ.get(ENV_ARTIFACT_DIR, str(DEFAULT_ARTIFACT_DIR)))
    artifact_dir.mkdir(parents=True, exist_ok=True)
    return artifact_dir


def create_temp_dir() -> Path:
    """Create a unique directory for a single tool invocation."""
    run_dir = get_artifact_dir() / uuid.uuid4().hex[:12]
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def cleanup_run_dir(run_dir: Path) -> None:
    if keep_files():
        return
    shutil.rmtree(run_dir, ignore_errors=True)


def should_inline(file_path: Path) -> bool:
    try:
        return file_path.stat().st_size <= MAX_INLINE_BYTES
    except OSError:
        return True


def file_artifact(file_path: Path) -> Artifact:
    """Artifact record for a JSONL file (row count = line count)."""
    try:
        size = file_path.stat().st_size
        with file_path.open("r", encoding="utf-8") as f:
            rows = sum(1 for _ in f)
    except OSError:
        size, rows = 0, 0
    return Artifact(path=str(file_path), row_count=rows, size_bytes=size)
