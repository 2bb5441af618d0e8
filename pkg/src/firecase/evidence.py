"""Content-addressed evidence registry.

Artifacts are identified by their content: the id is derived from the
SHA-256 of the file at registration time, so re-registering identical
content is a no-op and any later edit to the file is detectable. The
registry itself is a JSON file written atomically (temp file + rename);
concurrent writers are not supported.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterator

from firecase.findings import Finding, _Collector

ID_PREFIX = "ev-"
ID_HASH_CHARS = 16


class EvidenceError(RuntimeError):
    pass


class EvidenceKind(Enum):
    REQUIREMENTS_RATIONALE = "RequirementsRationale"
    DATA_EVALUATION_REPORT = "DataEvaluationReport"
    INTERNAL_TEST_RESULTS = "InternalTestResults"
    DEVELOPMENT_LOG = "DevelopmentLog"
    VERIFICATION_RESULTS = "VerificationResults"
    INTEGRATION_RESULTS = "IntegrationResults"
    PASS_LOG = "PassLog"


def file_sha256(path: str | Path) -> str:
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def evidence_id(sha256: str) -> str:
    return ID_PREFIX + sha256[:ID_HASH_CHARS]


@dataclass(frozen=True)
class EvidenceArtifact:
    id: str
    kind: EvidenceKind
    path: str  # relative to the registry root when possible
    sha256: str
    producer: str
    timestamp: str  # ISO 8601, UTC

    def to_json(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "kind": self.kind.value,
            "path": self.path,
            "sha256": self.sha256,
            "producer": self.producer,
            "timestamp": self.timestamp,
        }

    @classmethod
    def from_json(cls, payload: dict[str, Any]) -> EvidenceArtifact:
        return cls(
            id=payload["id"],
            kind=EvidenceKind(payload["kind"]),
            path=payload["path"],
            sha256=payload["sha256"],
            producer=payload["producer"],
            timestamp=payload["timestamp"],
        )


class EvidenceRegistry:
    """Mutable in-memory registry with an atomic JSON file form.

    ``root`` anchors the relative artifact paths; it defaults to the
    directory the registry file lives in.
    """

    def __init__(self, root: str | Path = ".") -> None:
        self.root = Path(root)
        self._by_id: dict[str, EvidenceArtifact] = {}

    def __len__(self) -> int:
        return len(self._by_id)

    def __iter__(self) -> Iterator[EvidenceArtifact]:
        return iter(sorted(self._by_id.values(), key=lambda a: a.id))

    def get(self, ev_id: str) -> EvidenceArtifact:
        try:
            return self._by_id[ev_id]
        except KeyError:
            raise EvidenceError(f"no evidence artifact {ev_id!r} in registry") from None

    def __contains__(self, ev_id: str) -> bool:
        return ev_id in self._by_id

    def resolve_path(self, artifact: EvidenceArtifact) -> Path:
        path = Path(artifact.path)
        return path if path.is_absolute() else self.root / path

    def register(
        self,
        path: str | Path,
        kind: EvidenceKind,
        producer: str,
        *,
        timestamp: str | None = None,
    ) -> EvidenceArtifact:
        """Record a file's content hash; idempotent for identical content.

        The same content under a different kind is an error: one artifact
        cannot be two kinds of evidence.
        """
        path = Path(path)
        if not path.is_file():
            raise EvidenceError(f"evidence file does not exist: {path}")
        sha = file_sha256(path)
        ev_id = evidence_id(sha)
        existing = self._by_id.get(ev_id)
        if existing is not None:
            if existing.kind is not kind:
                raise EvidenceError(
                    f"content {ev_id} already registered as {existing.kind.value}, "
                    f"cannot re-register as {kind.value}"
                )
            return existing
        try:
            stored = str(path.resolve().relative_to(self.root.resolve()))
        except ValueError:
            stored = str(path.resolve())
        artifact = EvidenceArtifact(
            id=ev_id,
            kind=kind,
            path=stored,
            sha256=sha,
            producer=producer,
            timestamp=timestamp
            if timestamp is not None
            else datetime.now(timezone.utc).isoformat(timespec="seconds"),
        )
        self._by_id[ev_id] = artifact
        return artifact

    def verify(self, ev_id: str) -> list[Finding]:
        """Check one artifact's file against its registered hash."""
        collector = _Collector()
        artifact = self.get(ev_id)
        path = self.resolve_path(artifact)
        if not path.is_file():
            collector.error("evidence-missing", artifact.id, f"file not found: {path}")
        elif file_sha256(path) != artifact.sha256:
            collector.error(
                "stale-hash",
                artifact.id,
                f"file {path} changed since registration (hash mismatch)",
            )
        return collector.sorted()

    def verify_all(self) -> list[Finding]:
        findings: list[Finding] = []
        for artifact in self:
            findings.extend(self.verify(artifact.id))
        return findings

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "artifacts": [a.to_json() for a in self],
        }

    def save(self, path: str | Path) -> None:
        """Atomic write: temp file in the target directory, then rename."""
        path = Path(path)
        payload = json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n"
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".evidence-", suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(payload)
            os.replace(tmp_name, path)
        except BaseException:
            try:
                os.unlink(tmp_name)
            except FileNotFoundError:
                pass
            raise

    @classmethod
    def load(cls, path: str | Path) -> EvidenceRegistry:
        path = Path(path)
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise EvidenceError(f"registry file does not exist: {path}") from None
        except json.JSONDecodeError as exc:
            raise EvidenceError(f"registry file {path} is not valid JSON: {exc}") from exc
        version = payload.get("schema_version")
        if version != 1:
            raise EvidenceError(f"unsupported registry schema_version {version!r}")
        registry = cls(root=path.parent)
        for raw in payload.get("artifacts", []):
            artifact = EvidenceArtifact.from_json(raw)
            if artifact.id in registry._by_id:
                raise EvidenceError(f"duplicate artifact id {artifact.id!r} in registry")
            if artifact.id != evidence_id(artifact.sha256):
                raise EvidenceError(
                    f"artifact id {artifact.id!r} does not match its hash"
                )
            registry._by_id[artifact.id] = artifact
        return registry
