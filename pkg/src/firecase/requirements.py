"""Requirement model, canonical manifest loading, and traceability checks.

The requirement set has three layers: system safety requirements for the
wildfire alert service (with an ML-allocation flag), quantified ML safety
requirements (MLSR1-MLSR4), and data requirements on the data sets used to
develop and verify the model (DR1-DR10). Trace links connect MLSRs to the
system requirements they refine and DRs to the MLSRs they support. The
robustness taxonomy (six dimensions of operating-condition classes, each
class flagged in- or out-of-context) lives alongside, since MLSR4
quantifies over it.

The canonical manifest ships with the package as
``firecase/data/paper_requirements.json``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Mapping

from firecase.findings import Finding, _Collector

CANONICAL_MANIFEST = "paper_requirements.json"
SCHEMA_VERSION = 1


class Hazard(Enum):
    MISS_EMERGENCY = "MissEmergency"
    FALSE_EMERGENCY = "FalseEmergency"


class MlsrKind(Enum):
    PERFORMANCE = "Performance"
    ROBUSTNESS = "Robustness"


class DataCategory(Enum):
    RELEVANCE = "Relevance"
    COMPLETENESS = "Completeness"
    ACCURACY = "Accuracy"
    BALANCE = "Balance"


class DimensionName(Enum):
    LAND_TYPE = "LandType"
    FIRE_SIZE = "FireSize"
    FIRE_INTENSITY = "FireIntensity"
    CLOUDS = "Clouds"
    TIME_OF_DAY = "TimeOfDay"
    TIME_OF_YEAR = "TimeOfYear"


class ManifestError(ValueError):
    """The manifest file does not conform to the documented schema."""


@dataclass(frozen=True, slots=True)
class SystemSafetyRequirement:
    id: str
    hazard: Hazard
    text: str
    allocated_to_ml: bool


@dataclass(frozen=True, slots=True)
class MlSafetyRequirement:
    id: str
    kind: MlsrKind
    text: str
    params: Mapping[str, Any] = field(default_factory=dict)


@dataclass(frozen=True, slots=True)
class RobustnessClass:
    label: str
    in_context: bool


@dataclass(frozen=True, slots=True)
class RobustnessDimension:
    name: DimensionName
    classes: tuple[RobustnessClass, ...]

    def in_context_labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes if c.in_context)

    def out_of_context_labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes if not c.in_context)

    def labels(self) -> tuple[str, ...]:
        return tuple(c.label for c in self.classes)


@dataclass(frozen=True, slots=True)
class DataRequirement:
    id: str
    category: DataCategory
    text: str
    params: Mapping[str, Any] = field(default_factory=dict)
    rationale: str = ""


@dataclass(frozen=True, slots=True)
class TraceLink:
    source: str
    target: str
    rationale: str = ""


@dataclass(frozen=True, slots=True)
class ClassCombination:
    """One point of the in-context operating envelope: a label per dimension."""

    labels: tuple[tuple[str, str], ...]  # (dimension name, class label) pairs

    def label_for(self, dimension: str) -> str:
        for name, label in self.labels:
            if name == dimension:
                return label
        raise KeyError(dimension)

    def as_dict(self) -> dict[str, str]:
        return dict(self.labels)


@dataclass(frozen=True)
class RequirementSet:
    system: tuple[SystemSafetyRequirement, ...]
    ml: tuple[MlSafetyRequirement, ...]
    data: tuple[DataRequirement, ...]
    dimensions: tuple[RobustnessDimension, ...]
    traces: tuple[TraceLink, ...]

    @cached_property
    def by_id(self) -> dict[str, SystemSafetyRequirement | MlSafetyRequirement | DataRequirement]:
        return {r.id: r for r in (*self.system, *self.ml, *self.data)}

    def dimension(self, name: DimensionName | str) -> RobustnessDimension:
        wanted = name.value if isinstance(name, DimensionName) else name
        for dim in self.dimensions:
            if dim.name.value == wanted:
                return dim
        raise KeyError(f"no robustness dimension {wanted!r}")

    def traces_from(self, requirement_id: str) -> tuple[TraceLink, ...]:
        return tuple(t for t in self.traces if t.source == requirement_id)

    def traces_to(self, requirement_id: str) -> tuple[TraceLink, ...]:
        return tuple(t for t in self.traces if t.target == requirement_id)


def _expect(condition: bool, message: str) -> None:
    if not condition:
        raise ManifestError(message)


def _enum(cls, raw: Any, what: str):
    try:
        return cls(raw)
    except ValueError:
        known = ", ".join(m.value for m in cls)
        raise ManifestError(f"unknown {what} {raw!r} (known: {known})") from None


def _record(raw: Any, what: str, fields: dict[str, type | tuple[type, ...]]) -> dict[str, Any]:
    _expect(isinstance(raw, dict), f"{what} must be an object, got {type(raw).__name__}")
    for name, types in fields.items():
        _expect(name in raw, f"{what} missing field {name!r}")
        _expect(
            isinstance(raw[name], types),
            f"{what} field {name!r} has wrong type {type(raw[name]).__name__}",
        )
    unknown = set(raw) - set(fields)
    _expect(not unknown, f"{what} has unknown fields {sorted(unknown)}")
    return raw


def parse_requirements(payload: Any) -> RequirementSet:
    """Build a :class:`RequirementSet` from decoded manifest JSON."""
    _expect(isinstance(payload, dict), "manifest must be a JSON object")
    _expect(
        payload.get("schema_version") == SCHEMA_VERSION,
        f"unsupported schema_version {payload.get('schema_version')!r}",
    )
    for key in ("system", "ml", "data", "dimensions", "traces"):
        _expect(isinstance(payload.get(key), list), f"manifest field {key!r} must be an array")

    system = tuple(
        SystemSafetyRequirement(
            id=rec["id"],
            hazard=_enum(Hazard, rec["hazard"], "hazard"),
            text=rec["text"],
            allocated_to_ml=rec["allocated_to_ml"],
        )
        for rec in (
            _record(r, "system requirement", {"id": str, "hazard": str, "text": str, "allocated_to_ml": bool})
            for r in payload["system"]
        )
    )
    ml = tuple(
        MlSafetyRequirement(
            id=rec["id"],
            kind=_enum(MlsrKind, rec["kind"], "ML requirement kind"),
            text=rec["text"],
            params=dict(rec["params"]),
        )
        for rec in (
            _record(r, "ML requirement", {"id": str, "kind": str, "text": str, "params": dict})
            for r in payload["ml"]
        )
    )
    data = tuple(
        DataRequirement(
            id=rec["id"],
            category=_enum(DataCategory, rec["category"], "data requirement category"),
            text=rec["text"],
            params=dict(rec["params"]),
            rationale=rec["rationale"],
        )
        for rec in (
            _record(
                r,
                "data requirement",
                {"id": str, "category": str, "text": str, "params": dict, "rationale": str},
            )
            for r in payload["data"]
        )
    )
    dimensions = []
    for raw_dim in payload["dimensions"]:
        rec = _record(raw_dim, "dimension", {"name": str, "classes": list})
        classes = tuple(
            RobustnessClass(label=c["label"], in_context=c["in_context"])
            for c in (
                _record(rc, "robustness class", {"label": str, "in_context": bool})
                for rc in rec["classes"]
            )
        )
        labels = [c.label for c in classes]
        _expect(len(labels) == len(set(labels)), f"dimension {rec['name']!r} repeats a class label")
        dimensions.append(
            RobustnessDimension(name=_enum(DimensionName, rec["name"], "dimension name"), classes=classes)
        )
    dim_names = [d.name for d in dimensions]
    _expect(len(dim_names) == len(set(dim_names)), "duplicate dimension name")

    traces = tuple(
        TraceLink(source=rec["from"], target=rec["to"], rationale=rec["rationale"])
        for rec in (
            _record(t, "trace link", {"from": str, "to": str, "rationale": str})
            for t in payload["traces"]
        )
    )

    ids = [r.id for r in (*system, *ml, *data)]
    dupes = sorted({i for i in ids if ids.count(i) > 1})
    _expect(not dupes, f"duplicate requirement id {dupes[0]!r}" if dupes else "")

    known = set(ids)
    for trace in traces:
        _expect(trace.source != trace.target, f"trace link {trace.source!r} points at itself")
        for endpoint in (trace.source, trace.target):
            _expect(endpoint in known, f"trace link references unknown requirement {endpoint!r}")

    return RequirementSet(
        system=system, ml=ml, data=data, dimensions=tuple(dimensions), traces=traces
    )


def load_requirements(path: str | Path) -> RequirementSet:
    """Load a requirements manifest file."""
    text = Path(path).read_text(encoding="utf-8")
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{path}: not valid JSON: {exc}") from exc
    return parse_requirements(payload)


def load_canonical_requirements() -> RequirementSet:
    """Load the manifest shipped with the package."""
    text = (resources.files("firecase") / "data" / CANONICAL_MANIFEST).read_text(encoding="utf-8")
    return parse_requirements(json.loads(text))


def serialize_requirements(rs: RequirementSet) -> str:
    """Serialize back to manifest JSON (lossless against the loader)."""
    payload = {
        "schema_version": SCHEMA_VERSION,
        "system": [
            {
                "id": r.id,
                "hazard": r.hazard.value,
                "text": r.text,
                "allocated_to_ml": r.allocated_to_ml,
            }
            for r in rs.system
        ],
        "ml": [
            {"id": r.id, "kind": r.kind.value, "text": r.text, "params": dict(r.params)}
            for r in rs.ml
        ],
        "data": [
            {
                "id": r.id,
                "category": r.category.value,
                "text": r.text,
                "params": dict(r.params),
                "rationale": r.rationale,
            }
            for r in rs.data
        ],
        "dimensions": [
            {
                "name": d.name.value,
                "classes": [{"label": c.label, "in_context": c.in_context} for c in d.classes],
            }
            for d in rs.dimensions
        ],
        "traces": [
            {"from": t.source, "to": t.target, "rationale": t.rationale} for t in rs.traces
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=False) + "\n"


def validate_traceability(rs: RequirementSet) -> list[Finding]:
    """Check the trace structure; returns findings, never raises.

    Errors: an MLSR with no trace to a system requirement, a trace from an
    MLSR to a system requirement not allocated to the ML component, and a
    data requirement with no trace to any MLSR. Warning: an allocated
    system requirement that no MLSR refines.
    """
    out = _Collector()
    system_ids = {r.id: r for r in rs.system}
    ml_ids = {r.id for r in rs.ml}

    for mlsr in rs.ml:
        parents = [t for t in rs.traces_from(mlsr.id) if t.target in system_ids]
        if not parents:
            out.error("mlsr-untraced", mlsr.id, "no trace to any system safety requirement")
        for trace in parents:
            parent = system_ids[trace.target]
            if not parent.allocated_to_ml:
                out.error(
                    "trace-to-unallocated",
                    mlsr.id,
                    f"traces to {parent.id}, which is not allocated to the ML component",
                )

    for dr in rs.data:
        if not any(t.target in ml_ids for t in rs.traces_from(dr.id)):
            out.error("dr-untraced", dr.id, "no trace to any ML safety requirement")

    traced_targets = {t.target for t in rs.traces if t.source in ml_ids}
    for sysreq in rs.system:
        if sysreq.allocated_to_ml and sysreq.id not in traced_targets:
            out.warning(
                "allocated-unrefined",
                sysreq.id,
                "allocated to the ML component but no ML safety requirement refines it",
            )

    return out.sorted()


@dataclass(frozen=True, slots=True)
class CombinationEnumeration:
    combinations: tuple[ClassCombination, ...]
    findings: tuple[Finding, ...]


def enumerate_in_context_combinations(rs: RequirementSet) -> CombinationEnumeration:
    """Cartesian product of in-context classes across all dimensions.

    Dimensions iterate in their declared order; within each dimension,
    classes keep their declared order, so the output order is the
    lexicographic product and is deterministic. A dimension with no
    in-context classes yields an empty product plus a warning.
    """
    out = _Collector()
    axes: list[list[tuple[str, str]]] = []
    for dim in rs.dimensions:
        labels = dim.in_context_labels()
        if not labels:
            out.warning(
                "empty-dimension",
                dim.name.value,
                "dimension has no in-context classes; combination set is empty",
            )
        axes.append([(dim.name.value, label) for label in labels])
    combos = tuple(ClassCombination(labels=combo) for combo in itertools.product(*axes))
    return CombinationEnumeration(combinations=combos, findings=tuple(out.sorted()))


def traceability_matrix_rows(rs: RequirementSet) -> list[dict[str, str]]:
    """Long-form traceability rows for the CSV matrix."""

    def kind_of(rid: str) -> str:
        req = rs.by_id[rid]
        if isinstance(req, SystemSafetyRequirement):
            return "system"
        if isinstance(req, MlSafetyRequirement):
            return "ml"
        return "data"

    rows = []
    for trace in rs.traces:
        rows.append(
            {
                "from": trace.source,
                "from_kind": kind_of(trace.source),
                "to": trace.target,
                "to_kind": kind_of(trace.target),
                "rationale": trace.rationale,
            }
        )
    return rows


def _all_in_context_product_size(rs: RequirementSet) -> int:
    size = 1
    for dim in rs.dimensions:
        size *= len(dim.in_context_labels())
    return size


def combination_count(rs: RequirementSet) -> int:
    """Closed-form product of per-dimension in-context counts."""
    return _all_in_context_product_size(rs)
