"""MCP response envelope builder.

Wraps engine results into a consistent WikiSRResponse/v1 shape for
reliable LLM tool chaining.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any

from wikisr import __version__
from wikisr.artifacts import Artifact  # noqa: F401 (re-exported)

SCHEMA = "WikiSRResponse/v1"


@dataclass
class EnvelopeWarning:
    """Structured warning."""

    code: str
    message: str
    severity: str = "warning"

    def to_dict(self) -> dict[str, Any]:
        return {"code": self.code, "message": self.message, "severity": self.severity}


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def compute_digest(obj: Any) -> str:
    """SHA-256 of canonical JSON, for rule hashes and report fingerprints."""
    digest = hashlib.sha256(canonical_json(obj).encode("utf-8")).hexdigest()
    return f"sha256:{digest}"


def _meta() -> dict[str, Any]:
    return {
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def build_envelope(
    *,
    summary: str,
    data: dict[str, Any] | None = None,
    impact: str = "read",
    artifact: Artifact | None = None,
    warnings: list[EnvelopeWarning] | None = None,
) -> str:
    """Build a successful WikiSRResponse/v1 JSON string."""
    envelope: dict[str, Any] = {
        "$schema": SCHEMA,
        "ok": True,
        "summary": summary,
        "data": data or {},
    }
    if artifact:
        envelope["artifact"] = artifact.to_dict()
    if warnings:
        envelope["warnings"] = [w.to_dict() for w in warnings]
    envelope["impact"] = impact
    envelope["meta"] = _meta()
    return json.dumps(envelope, indent=2)


def error_envelope(summary: str, *, impact: str = "read", error: str = "") -> str:
    """Build an error envelope; tools return this instead of raising."""
    envelope: dict[str, Any] = {
        "$schema": SCHEMA,
        "ok": False,
        "summary": summary,
        "data": {"error": error} if error else {},
        "impact": impact,
        "meta": _meta(),
    }
    return json.dumps(envelope, indent=2)
