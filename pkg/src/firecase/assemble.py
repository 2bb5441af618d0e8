"""Safety-case assembly: project manifests, fail-closed binding, report bundles.

A project is a single ``project.json`` manifest; every path in it is
resolved relative to the manifest file, so a project directory can be
checked out anywhere and still assemble. Assembly refuses to produce a
case unless every Solution node is bound to a registered artifact whose
file still matches its recorded hash. Adverse evidence (a bound JSON
report whose top-level ``"passed"`` is false) does not block assembly;
it stamps the case "not assured" instead, keeping failures visible in
the output rather than hiding the whole argument.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping

from firecase.evidence import EvidenceArtifact, EvidenceError, EvidenceKind, EvidenceRegistry
from firecase.findings import Finding, Severity
from firecase.gsn import (
    CORE_FRAGMENT_IDS,
    FRAGMENT_IDS,
    ArgumentGraph,
    load_fragment,
    merge_fragments,
    parse_argument,
    render_dot,
    validate_argument,
)
from firecase.requirements import (
    RequirementSet,
    load_canonical_requirements,
    load_requirements,
    traceability_matrix_rows,
)

MANIFEST_SCHEMA_VERSION = 1
ROOT_FRAGMENT = "ml-scoping"

STATUS_ASSURED = "assured"
STATUS_NOT_ASSURED = "not assured"


class AssemblyError(RuntimeError):
    pass


@dataclass(frozen=True)
class SafetyCaseProject:
    manifest_path: Path
    requirements: RequirementSet
    fragments: dict[str, ArgumentGraph]  # fragment id -> graph, merge order
    registry: EvidenceRegistry
    bindings: dict[str, str]  # Solution node id -> evidence id


def _resolve(base: Path, relative: str) -> Path:
    path = Path(relative)
    return path if path.is_absolute() else base / path


def load_project(manifest_path: str | Path) -> SafetyCaseProject:
    """Read a ``project.json`` manifest and everything it references."""
    manifest_path = Path(manifest_path)
    try:
        payload = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise AssemblyError(f"manifest does not exist: {manifest_path}") from None
    except json.JSONDecodeError as exc:
        raise AssemblyError(f"manifest {manifest_path} is not valid JSON: {exc}") from exc
    if payload.get("schema_version") != MANIFEST_SCHEMA_VERSION:
        raise AssemblyError(
            f"unsupported manifest schema_version {payload.get('schema_version')!r}"
        )
    base = manifest_path.parent

    req_ref = payload.get("requirements")
    requirements = (
        load_canonical_requirements()
        if req_ref is None
        else load_requirements(_resolve(base, req_ref))
    )

    frag_ref = payload.get("fragments", "builtin")
    include_deployment = bool(payload.get("include_deployment", False))
    fragments: dict[str, ArgumentGraph] = {}
    if frag_ref == "builtin":
        ids = FRAGMENT_IDS if include_deployment else CORE_FRAGMENT_IDS
        for fid in ids:
            fragments[fid] = load_fragment(fid)
    elif isinstance(frag_ref, Mapping):
        for fid in FRAGMENT_IDS:  # fixed order regardless of manifest key order
            if fid not in frag_ref:
                continue
            path = _resolve(base, frag_ref[fid])
            try:
                source = path.read_text(encoding="utf-8")
            except FileNotFoundError:
                raise AssemblyError(f"fragment file does not exist: {path}") from None
            fragments[fid] = parse_argument(source, graph_id=fid)
        unknown = sorted(set(frag_ref) - set(FRAGMENT_IDS))
        if unknown:
            raise AssemblyError(f"unknown fragment ids in manifest: {', '.join(unknown)}")
    else:
        raise AssemblyError(
            f"manifest 'fragments' must be \"builtin\" or a mapping, got {frag_ref!r}"
        )
    if ROOT_FRAGMENT not in fragments:
        raise AssemblyError(f"project has no {ROOT_FRAGMENT!r} fragment to root the case")

    reg_ref = payload.get("evidence_registry")
    if reg_ref is None:
        raise AssemblyError("manifest has no 'evidence_registry' entry")
    try:
        registry = EvidenceRegistry.load(_resolve(base, reg_ref))
    except EvidenceError as exc:
        raise AssemblyError(str(exc)) from exc

    bindings = payload.get("bindings", {})
    if not isinstance(bindings, Mapping) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in bindings.items()
    ):
        raise AssemblyError("manifest 'bindings' must map node ids to evidence ids")

    return SafetyCaseProject(
        manifest_path=manifest_path,
        requirements=requirements,
        fragments=fragments,
        registry=registry,
        bindings=dict(bindings),
    )


@dataclass(frozen=True)
class AssembledCase:
    project: SafetyCaseProject
    graph: ArgumentGraph
    status: str  # STATUS_ASSURED or STATUS_NOT_ASSURED
    adverse: tuple[tuple[str, str], ...]  # (solution node id, evidence id)
    warnings: tuple[Finding, ...]

    @property
    def assured(self) -> bool:
        return self.status == STATUS_ASSURED


def _is_adverse(path: Path) -> bool:
    # adverse = a JSON report that says so itself; anything unparseable is
    # not a report and cannot be adverse
    if path.suffix.lower() != ".json":
        return False
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError):
        return False
    return isinstance(payload, dict) and payload.get("passed") is False


def assemble_case(project: SafetyCaseProject) -> AssembledCase:
    """Merge the project's fragments into one case, failing closed.

    Raises AssemblyError on: fragment validation errors, a Solution node
    without a binding, a binding to an unregistered id or to a node that
    does not exist, and any bound file that is missing or no longer
    matches its registered hash.
    """
    for fid, graph in project.fragments.items():
        errors = [f for f in validate_argument(graph) if f.severity is Severity.ERROR]
        if errors:
            listing = "; ".join(str(f) for f in errors)
            raise AssemblyError(f"fragment {fid!r} does not validate: {listing}")

    solution_ids = {
        node.id for graph in project.fragments.values() for node in graph.solutions()
    }
    unbound = sorted(solution_ids - set(project.bindings))
    if unbound:
        raise AssemblyError(
            "unbound solution node(s): " + ", ".join(unbound)
        )
    stray = sorted(set(project.bindings) - solution_ids)
    if stray:
        raise AssemblyError(
            "binding(s) for node(s) not in any fragment: " + ", ".join(stray)
        )

    adverse: list[tuple[str, str]] = []
    for node_id in sorted(solution_ids):
        ev_id = project.bindings[node_id]
        try:
            artifact = project.registry.get(ev_id)
        except EvidenceError:
            raise AssemblyError(
                f"solution {node_id} is bound to {ev_id}, which is not in the registry"
            ) from None
        problems = project.registry.verify(ev_id)
        if problems:
            detail = "; ".join(f.message for f in problems)
            raise AssemblyError(
                f"evidence for solution {node_id} failed verification ({ev_id}): {detail}"
            )
        if _is_adverse(project.registry.resolve_path(artifact)):
            adverse.append((node_id, ev_id))

    merged = merge_fragments(project.fragments, root_fragment=ROOT_FRAGMENT)
    findings = validate_argument(merged, bound_evidence=set(project.bindings))
    errors = [f for f in findings if f.severity is Severity.ERROR]
    if errors:
        listing = "; ".join(str(f) for f in errors)
        raise AssemblyError(f"merged case does not validate: {listing}")
    warnings = tuple(f for f in findings if f.severity is Severity.WARNING)

    status = STATUS_NOT_ASSURED if adverse else STATUS_ASSURED
    return AssembledCase(
        project=project,
        graph=merged,
        status=status,
        adverse=tuple(adverse),
        warnings=warnings,
    )


def _read_bound_json(project: SafetyCaseProject, ev_id: str) -> dict[str, Any] | None:
    artifact = project.registry.get(ev_id)
    path = project.registry.resolve_path(artifact)
    if path.suffix.lower() != ".json":
        return None
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError, UnicodeDecodeError):
        return None
    return payload if isinstance(payload, dict) else None


def _dr_verdicts(project: SafetyCaseProject) -> dict[str, str]:
    """Per-DR verdicts pulled from bound DataEvaluationReport artifacts."""
    verdicts: dict[str, str] = {}
    for node_id in sorted(project.bindings):
        ev_id = project.bindings[node_id]
        if project.registry.get(ev_id).kind is not EvidenceKind.DATA_EVALUATION_REPORT:
            continue
        payload = _read_bound_json(project, ev_id)
        if payload is None:
            continue
        for result in payload.get("results", []):
            if isinstance(result, dict) and "dr_id" in result and "verdict" in result:
                verdicts[str(result["dr_id"])] = str(result["verdict"])
    return verdicts


def _mlsr_verdicts(project: SafetyCaseProject) -> dict[str, str]:
    """Per-MLSR rollup pulled from bound VerificationResults campaign JSON."""
    verdicts: dict[str, str] = {}
    for node_id in sorted(project.bindings):
        ev_id = project.bindings[node_id]
        if project.registry.get(ev_id).kind is not EvidenceKind.VERIFICATION_RESULTS:
            continue
        payload = _read_bound_json(project, ev_id)
        if payload is None or "cases" not in payload:
            continue  # e.g. a coverage report, which has no per-case verdicts
        cases = [c for c in payload.get("cases", []) if isinstance(c, dict)]
        if not cases:
            continue
        for key, mlsr in (("mlsr1", "MLSR1"), ("mlsr2", "MLSR2"), ("mlsr3", "MLSR3")):
            statuses = {c.get(key) for c in cases}
            verdicts[mlsr] = "Fail" if "Fail" in statuses else "Pass"
        summary = payload.get("summary", {})
        rate = summary.get("detection_rate")
        floor = summary.get("min_detection_rate")
        if isinstance(rate, (int, float)) and isinstance(floor, (int, float)):
            verdicts["MLSR4"] = "Pass" if rate >= floor else "Fail"
    return verdicts


def _csv_bytes(header: list[str], rows: list[list[str]]) -> bytes:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().encode("utf-8")


def case_summary(case: AssembledCase) -> dict[str, Any]:
    """The verdict summary emitted into the report bundle."""
    project = case.project
    bound_to: dict[str, list[str]] = {}
    for node_id, ev_id in project.bindings.items():
        bound_to.setdefault(ev_id, []).append(node_id)
    solutions = {
        node_id: {
            "evidence": ev_id,
            "kind": project.registry.get(ev_id).kind.value,
            "adverse": (node_id, ev_id) in case.adverse,
        }
        for node_id, ev_id in sorted(project.bindings.items())
    }
    return {
        "schema_version": 1,
        "status": case.status,
        "passed": case.assured,
        "root": case.graph.root,
        "fragments": list(project.fragments),
        "nodes": len(case.graph.nodes),
        "solutions": solutions,
        "adverse": [
            {"solution": node_id, "evidence": ev_id} for node_id, ev_id in case.adverse
        ],
        "mlsr_verdicts": _mlsr_verdicts(project),
        "dr_verdicts": _dr_verdicts(project),
        "warnings": [str(f) for f in case.warnings],
    }


def _summary_text(summary: dict[str, Any]) -> str:
    lines = [
        f"Safety case: {summary['status'].upper()}",
        f"Root claim: {summary['root']} ({summary['nodes']} nodes, "
        f"{len(summary['fragments'])} fragments)",
        "",
        "Solutions:",
    ]
    for node_id, info in summary["solutions"].items():
        flag = "  [ADVERSE]" if info["adverse"] else ""
        lines.append(f"  {node_id}: {info['evidence']} ({info['kind']}){flag}")
    if summary["mlsr_verdicts"]:
        lines.append("")
        lines.append("MLSR verdicts:")
        for mlsr, verdict in sorted(summary["mlsr_verdicts"].items()):
            lines.append(f"  {mlsr}: {verdict}")
    if summary["dr_verdicts"]:
        lines.append("")
        lines.append("Data requirement verdicts:")
        for dr, verdict in sorted(
            summary["dr_verdicts"].items(), key=lambda kv: (len(kv[0]), kv[0])
        ):
            lines.append(f"  {dr}: {verdict}")
    if summary["warnings"]:
        lines.append("")
        lines.append("Warnings:")
        lines.extend(f"  {w}" for w in summary["warnings"])
    return "\n".join(lines) + "\n"


def emit_report(case: AssembledCase, out_dir: str | Path) -> list[Path]:
    """Write the report bundle; bytes are deterministic for a fixed case."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    project = case.project
    written: list[Path] = []

    def write(name: str, data: bytes) -> None:
        path = out_dir / name
        path.write_bytes(data)
        written.append(path)

    write("merged.dot", render_dot(case.graph).encode("utf-8"))
    for fid, graph in project.fragments.items():
        write(f"{fid}.dot", render_dot(graph).encode("utf-8"))

    trace_rows = traceability_matrix_rows(project.requirements)
    write(
        "traceability.csv",
        _csv_bytes(
            ["from", "from_kind", "to", "to_kind", "rationale"],
            [[r["from"], r["from_kind"], r["to"], r["to_kind"], r["rationale"]] for r in trace_rows],
        ),
    )

    bound_to: dict[str, list[str]] = {}
    for node_id, ev_id in sorted(project.bindings.items()):
        bound_to.setdefault(ev_id, []).append(node_id)
    write(
        "evidence.csv",
        _csv_bytes(
            ["id", "kind", "path", "sha256", "producer", "timestamp", "bound_to"],
            [
                [a.id, a.kind.value, a.path, a.sha256, a.producer, a.timestamp,
                 ";".join(bound_to.get(a.id, []))]
                for a in project.registry
            ],
        ),
    )

    summary = case_summary(case)
    write(
        "summary.json",
        (json.dumps(summary, indent=2, sort_keys=True) + "\n").encode("utf-8"),
    )
    write("summary.txt", _summary_text(summary).encode("utf-8"))
    return written
