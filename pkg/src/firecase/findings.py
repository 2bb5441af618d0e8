"""Shared finding type for validation and evaluation results.

Every checker in the package (argument validation, traceability checks,
data evaluation, case assembly) reports problems as a flat list of
:class:`Finding` records instead of raising on the first issue, so callers
can render a complete report and decide how strict to be.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Severity(Enum):
    ERROR = "error"
    WARNING = "warning"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class Finding:
    """One problem discovered by a checker.

    ``subject`` names the thing the finding is about (a node id, a
    requirement id, a file path); ``code`` is a stable machine-readable
    label so tests and tooling do not have to match on message text.
    """

    severity: Severity
    code: str
    subject: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: [{self.code}] {self.subject}: {self.message}"


def errors(findings: list[Finding]) -> list[Finding]:
    return [f for f in findings if f.severity is Severity.ERROR]


def warnings(findings: list[Finding]) -> list[Finding]:
    return [f for f in findings if f.severity is Severity.WARNING]


def sort_findings(findings: list[Finding]) -> list[Finding]:
    """Deterministic report order: errors first, then by code and subject."""
    rank = {Severity.ERROR: 0, Severity.WARNING: 1}
    return sorted(findings, key=lambda f: (rank[f.severity], f.code, f.subject, f.message))


@dataclass(frozen=True, slots=True)
class _Collector:
    """Small helper so checkers can append findings with less noise."""

    items: list[Finding] = field(default_factory=list)

    def error(self, code: str, subject: str, message: str) -> None:
        self.items.append(Finding(Severity.ERROR, code, subject, message))

    def warning(self, code: str, subject: str, message: str) -> None:
        self.items.append(Finding(Severity.WARNING, code, subject, message))

    def sorted(self) -> list[Finding]:
        return sort_findings(self.items)
