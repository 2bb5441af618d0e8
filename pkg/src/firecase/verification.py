"""Verification campaign: case matrix, independent evaluation, MLSR verdicts.

Cases are (land type, fire size, cloud cover) combinations drawn from the
Verification split. The detector under test sees only tile pixels; truth
masks and ``expected_has_fire`` stay on the judging side. MLSR3's monthly
budget cannot be judged from a finite case set, so the campaign reports a
per-frame false-positive tally and leaves the monthly extrapolation to
``metrics.monthly_fp`` with frames/month from the constellation model.
"""

from __future__ import annotations

import csv
import io
from collections import defaultdict
from dataclasses import dataclass
from enum import Enum
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from firecase.detector import DetectorSpec, run_batch
from firecase.findings import Finding, _Collector
from firecase.metrics import SampleVerdict, VerdictThresholds, classify_sample
from firecase.raster import (
    CatalogEntry,
    CloudBucket,
    DatasetCatalog,
    FireMask,
    FireSizeBucket,
    Split,
)
from firecase.requirements import (
    DimensionName,
    RequirementSet,
    load_canonical_requirements,
)


class CampaignError(RuntimeError):
    pass


class MlsrStatus(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    NOT_APPLICABLE = "N/A"


# Worst failure wins the row color: a missed fire is worse than a false
# alarm, which is worse than a misaligned boundary.
class DisplayColor(Enum):
    GREEN = "green"
    YELLOW = "yellow"
    ORANGE = "orange"
    RED = "red"


@dataclass(frozen=True)
class VerificationCase:
    case_id: int
    land_type: str
    fire_size: FireSizeBucket
    cloud: CloudBucket
    tile_ids: tuple[str, ...]
    expected_has_fire: bool

    def __post_init__(self) -> None:
        if not self.tile_ids:
            raise ValueError(f"case {self.case_id} has no tiles")
        expected = self.fire_size is not FireSizeBucket.NONE
        if self.expected_has_fire is not expected:
            raise ValueError(
                f"case {self.case_id}: expected_has_fire={self.expected_has_fire} "
                f"contradicts fire_size={self.fire_size.value}"
            )


@dataclass(frozen=True)
class CaseMatrix:
    cases: tuple[VerificationCase, ...]
    absent: tuple[tuple[str, FireSizeBucket, CloudBucket], ...]

    def case(self, case_id: int) -> VerificationCase:
        for c in self.cases:
            if c.case_id == case_id:
                return c
        raise KeyError(case_id)


def coverage_report(matrix: CaseMatrix) -> dict[str, Any]:
    """Verification-data coverage in JSON form: present cases vs the full grid."""
    return {
        "schema_version": 1,
        "passed": not matrix.absent,
        "cases_present": len(matrix.cases),
        "combinations_total": len(matrix.cases) + len(matrix.absent),
        "absent": [
            {"land_type": land, "fire_size": size.value, "cloud": cloud.value}
            for land, size, cloud in matrix.absent
        ],
    }


def build_case_matrix(
    catalog: DatasetCatalog, *, requirements: RequirementSet | None = None
) -> CaseMatrix:
    """Group the Verification split into cases, numbered deterministically.

    One case per (land type, fire-size bucket, cloud bucket) present in
    the split; numbering follows the sorted combination order. Absent
    combinations from the full in-context grid are reported, not invented.
    """
    rs = requirements if requirements is not None else load_canonical_requirements()
    entries = catalog.in_split(Split.VERIFICATION)
    if not entries:
        raise CampaignError("verification split is empty")

    groups: dict[tuple[str, FireSizeBucket, CloudBucket], list[CatalogEntry]] = defaultdict(list)
    for entry in entries:
        meta = entry.meta
        if meta.fire_size_bucket is None or meta.cloud_bucket is None:
            raise CampaignError(
                f"verification tile {meta.tile_id!r} lacks fire-size or cloud bucket metadata"
            )
        key = (meta.class_labels["LandType"], meta.fire_size_bucket, meta.cloud_bucket)
        groups[key].append(entry)

    def sort_key(key: tuple[str, FireSizeBucket, CloudBucket]):
        return (key[0], key[1].value, key[2].value)

    cases = []
    for index, key in enumerate(sorted(groups, key=sort_key), start=1):
        land, size, cloud = key
        tile_ids = tuple(sorted(e.meta.tile_id for e in groups[key]))
        cases.append(
            VerificationCase(
                case_id=index,
                land_type=land,
                fire_size=size,
                cloud=cloud,
                tile_ids=tile_ids,
                expected_has_fire=size is not FireSizeBucket.NONE,
            )
        )

    in_context_lands = rs.dimension(DimensionName.LAND_TYPE).in_context_labels()
    full_grid = {
        (land, size, cloud)
        for land in in_context_lands
        for size in FireSizeBucket
        for cloud in CloudBucket
    }
    absent = tuple(sorted(full_grid - set(groups), key=sort_key))
    return CaseMatrix(tuple(cases), absent)


@dataclass(frozen=True)
class CaseResult:
    case_id: int
    land_type: str
    fire_size: FireSizeBucket
    cloud: CloudBucket
    mlsr1: MlsrStatus
    mlsr2: MlsrStatus
    mlsr3: MlsrStatus
    tiles: int
    false_negatives: int
    false_positives: int
    max_boundary_offset_px: float | None

    @property
    def statuses(self) -> dict[str, MlsrStatus]:
        return {"MLSR1": self.mlsr1, "MLSR2": self.mlsr2, "MLSR3": self.mlsr3}

    @property
    def passed(self) -> bool:
        return MlsrStatus.FAIL not in self.statuses.values()

    @property
    def display_color(self) -> DisplayColor:
        if self.mlsr2 is MlsrStatus.FAIL:
            return DisplayColor.RED
        if self.mlsr3 is MlsrStatus.FAIL:
            return DisplayColor.ORANGE
        if self.mlsr1 is MlsrStatus.FAIL:
            return DisplayColor.YELLOW
        return DisplayColor.GREEN


@dataclass(frozen=True)
class ClassBreakdown:
    land_type: str
    cases: int
    failed_cases: int

    @property
    def passed(self) -> bool:
        return self.failed_cases == 0


@dataclass(frozen=True)
class CampaignSummary:
    total_cases: int
    fire_tiles: int
    detected_fire_tiles: int
    false_positives: int
    min_detection_rate: float
    breakdown: tuple[ClassBreakdown, ...]
    findings: tuple[str, ...]

    @property
    def detection_rate(self) -> float:
        if self.fire_tiles == 0:
            return 1.0
        return self.detected_fire_tiles / self.fire_tiles

    @property
    def mlsr4_passed(self) -> bool:
        return all(b.passed for b in self.breakdown)


@dataclass(frozen=True)
class CampaignResult:
    results: tuple[CaseResult, ...]
    summary: CampaignSummary

    @property
    def passed(self) -> bool:
        return (
            all(r.passed for r in self.results)
            and self.summary.detection_rate >= self.summary.min_detection_rate
        )

    def result(self, case_id: int) -> CaseResult:
        for r in self.results:
            if r.case_id == case_id:
                return r
        raise KeyError(case_id)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "passed": self.passed,
            "cases": [
                {
                    "case_id": r.case_id,
                    "land_type": r.land_type,
                    "fire_size": r.fire_size.value,
                    "cloud": r.cloud.value,
                    "tiles": r.tiles,
                    "mlsr1": r.mlsr1.value,
                    "mlsr2": r.mlsr2.value,
                    "mlsr3": r.mlsr3.value,
                    "color": r.display_color.value,
                    "false_negatives": r.false_negatives,
                    "false_positives": r.false_positives,
                    "max_boundary_offset_px": r.max_boundary_offset_px,
                }
                for r in self.results
            ],
            "summary": {
                "total_cases": self.summary.total_cases,
                "fire_tiles": self.summary.fire_tiles,
                "detected_fire_tiles": self.summary.detected_fire_tiles,
                "detection_rate": self.summary.detection_rate,
                "min_detection_rate": self.summary.min_detection_rate,
                "false_positives": self.summary.false_positives,
                "mlsr4_passed": self.summary.mlsr4_passed,
                "breakdown": [
                    {
                        "land_type": b.land_type,
                        "cases": b.cases,
                        "failed_cases": b.failed_cases,
                    }
                    for b in self.summary.breakdown
                ],
                "findings": list(self.summary.findings),
            },
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [
                "case_id",
                "land_type",
                "fire_size",
                "cloud",
                "tiles",
                "mlsr1",
                "mlsr2",
                "mlsr3",
                "color",
                "false_negatives",
                "false_positives",
                "max_boundary_offset_px",
            ]
        )
        for r in self.results:
            offset = "" if r.max_boundary_offset_px is None else f"{r.max_boundary_offset_px:.3f}"
            writer.writerow(
                [
                    r.case_id,
                    r.land_type,
                    r.fire_size.value,
                    r.cloud.value,
                    r.tiles,
                    r.mlsr1.value,
                    r.mlsr2.value,
                    r.mlsr3.value,
                    r.display_color.value,
                    r.false_negatives,
                    r.false_positives,
                    offset,
                ]
            )
        return buf.getvalue()

    def findings_text(self) -> str:
        lines = [
            "Verification campaign: {} ({} cases, detection rate {:.1%}, {} FPs)".format(
                "PASSED" if self.passed else "FAILED",
                self.summary.total_cases,
                self.summary.detection_rate,
                self.summary.false_positives,
            )
        ]
        for finding in self.summary.findings:
            lines.append(f"  - {finding}")
        if not self.summary.findings:
            lines.append("  - no findings")
        return "\n".join(lines) + "\n"


def run_campaign(
    cases: Sequence[VerificationCase] | CaseMatrix,
    detector_spec: DetectorSpec,
    catalog: DatasetCatalog,
    *,
    thresholds: VerdictThresholds = VerdictThresholds(),
    requirements: RequirementSet | None = None,
) -> CampaignResult:
    """Run the detector over every case and judge MLSR1-3 per case.

    MLSR1 (boundary) and MLSR2 (detection) apply to fire cases, MLSR3
    (false alarms) to no-fire cases; a case fails an applicable MLSR if
    any of its tiles violates it. MLSR4 is judged as a per-land-type
    rollup: the performance verdicts must hold inside every represented
    class, not just on average.
    """
    rs = requirements if requirements is not None else load_canonical_requirements()
    if isinstance(cases, CaseMatrix):
        cases = cases.cases
    max_offset_px = float(rs.by_id["MLSR1"].params["max_boundary_offset_px"])
    min_detection_rate = float(rs.by_id["MLSR2"].params["min_detection_rate"])

    results = []
    fire_tiles = detected = total_fp = 0
    per_land: dict[str, list[CaseResult]] = defaultdict(list)

    for case in sorted(cases, key=lambda c: c.case_id):
        entries = [catalog.entry(tile_id) for tile_id in case.tile_ids]
        for entry in entries:
            if entry.meta.split is not Split.VERIFICATION:
                raise CampaignError(
                    f"case {case.case_id}: tile {entry.meta.tile_id!r} is not in the "
                    "Verification split"
                )
            if case.expected_has_fire and entry.mask_path is None:
                raise CampaignError(
                    f"case {case.case_id}: fire tile {entry.meta.tile_id!r} has no truth mask"
                )
        outputs = run_batch(detector_spec, [e.load_tile() for e in entries])
        verdicts: list[SampleVerdict] = []
        for entry, output in zip(entries, outputs):
            if entry.mask_path is not None:
                truth = entry.load_truth()
            else:
                # a no-fire tile needs no audited mask; truth is trivially empty
                truth = FireMask(np.zeros_like(output.mask.values))
            verdicts.append(
                classify_sample(output.mask, truth, thresholds, tile_id=entry.meta.tile_id)
            )

        fn = sum(1 for v in verdicts if v.is_false_negative)
        fp = sum(1 for v in verdicts if v.is_false_positive)
        offsets = [
            v.boundary_offset_px for v in verdicts if v.boundary_offset_px is not None
        ]
        max_offset = max(offsets) if offsets else None

        if case.expected_has_fire:
            mlsr1 = (
                MlsrStatus.FAIL
                if any(o >= max_offset_px for o in offsets)
                else MlsrStatus.PASS
            )
            mlsr2 = MlsrStatus.FAIL if fn else MlsrStatus.PASS
            mlsr3 = MlsrStatus.NOT_APPLICABLE
            fire_tiles += len(verdicts)
            detected += sum(1 for v in verdicts if not v.is_false_negative)
        else:
            mlsr1 = MlsrStatus.NOT_APPLICABLE
            mlsr2 = MlsrStatus.NOT_APPLICABLE
            mlsr3 = MlsrStatus.FAIL if fp else MlsrStatus.PASS
        total_fp += fp

        result = CaseResult(
            case_id=case.case_id,
            land_type=case.land_type,
            fire_size=case.fire_size,
            cloud=case.cloud,
            mlsr1=mlsr1,
            mlsr2=mlsr2,
            mlsr3=mlsr3,
            tiles=len(verdicts),
            false_negatives=fn,
            false_positives=fp,
            max_boundary_offset_px=max_offset,
        )
        results.append(result)
        per_land[case.land_type].append(result)

    breakdown = tuple(
        ClassBreakdown(
            land_type=land,
            cases=len(rs_list),
            failed_cases=sum(1 for r in rs_list if not r.passed),
        )
        for land, rs_list in sorted(per_land.items())
    )

    findings = []
    detection_rate = detected / fire_tiles if fire_tiles else 1.0
    if detection_rate < min_detection_rate:
        findings.append(
            f"detection rate {detection_rate:.1%} below the "
            f"{min_detection_rate:.0%} requirement"
        )
    for b in breakdown:
        if not b.passed:
            findings.append(
                f"limitation: {b.land_type} ({b.failed_cases}/{b.cases} cases failed)"
            )
    for r in results:
        if r.mlsr1 is MlsrStatus.FAIL and r.mlsr2 is not MlsrStatus.FAIL:
            findings.append(
                f"case {r.case_id}: output mask not sufficiently aligned "
                f"(max offset {r.max_boundary_offset_px:.1f} px)"
            )

    summary = CampaignSummary(
        total_cases=len(results),
        fire_tiles=fire_tiles,
        detected_fire_tiles=detected,
        false_positives=total_fp,
        min_detection_rate=min_detection_rate,
        breakdown=breakdown,
        findings=tuple(findings),
    )
    return CampaignResult(tuple(results), summary)


def independence_check(catalog: DatasetCatalog, *, dev_team: str) -> list[Finding]:
    """Check that verification data is independent of the development team."""
    collector = _Collector()
    for entry in catalog.in_split(Split.VERIFICATION):
        meta = entry.meta
        prov = meta.provenance
        if prov is None or prov.labeler_team is None or prov.collected_by_dev_team is None:
            collector.warning(
                "provenance-missing",
                meta.tile_id,
                "provenance incomplete; independence unverifiable",
            )
            continue
        if prov.collected_by_dev_team:
            collector.error(
                "dev-collected",
                meta.tile_id,
                "verification tile collected by the development team",
            )
        if prov.labeler_team == dev_team:
            collector.error(
                "dev-labeled",
                meta.tile_id,
                f"verification tile labeled by the development team ({dev_team!r})",
            )
    return collector.sorted()
