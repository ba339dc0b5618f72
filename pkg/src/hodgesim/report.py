"""Structured pass/fail certificates."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Any


def digest(payload: Any) -> str:
    """Short stable hash of a JSON-serialisable payload."""
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class VerificationReport:
    check: str
    passed: bool
    witness: Any = None
    inputs_digest: str | None = None
    seconds: float | None = None
    seed: int | None = None
    details: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.passed and self.witness is None:
            raise ValueError(f"failed report {self.check!r} must carry a witness")

    def __bool__(self) -> bool:
        return self.passed

    @classmethod
    def ok(cls, check: str, **kw: Any) -> "VerificationReport":
        return cls(check, True, **kw)

    @classmethod
    def failed(cls, check: str, witness: Any, **kw: Any) -> "VerificationReport":
        return cls(check, False, witness, **kw)

    def with_(self, **kw: Any) -> "VerificationReport":
        return replace(self, **kw)

    def to_json(self, timing: bool = False) -> dict[str, Any]:
        out: dict[str, Any] = {"check": self.check, "pass": self.passed}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.inputs_digest is not None:
            out["digest"] = self.inputs_digest
        if self.seed is not None:
            out["seed"] = self.seed
        if self.details:
            out["details"] = self.details
        if timing and self.seconds is not None:
            out["seconds"] = self.seconds
        return out

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> "VerificationReport":
        return cls(
            check=data["check"],
            passed=data["pass"],
            witness=data.get("witness"),
            inputs_digest=data.get("digest"),
            seconds=data.get("seconds"),
            seed=data.get("seed"),
            details=data.get("details", {}),
        )


def combine(check: str, reports: list[VerificationReport], **kw: Any) -> VerificationReport:
    """Fold sub-reports into one; the first failure becomes the witness."""
    bad = [r for r in reports if not r.passed]
    if bad:
        return VerificationReport.failed(
            check, {"failed": bad[0].check, "witness": bad[0].witness}, **kw
        )
    return VerificationReport.ok(check, **kw)
