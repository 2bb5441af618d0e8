"""Fixture project builder: a miniature, fully wired safety-case project.

Produces a self-contained project directory — compact requirement set,
synthetic development and verification catalogs, every evidence artifact
generated by actually running the toolchain, an evidence registry, and a
``project.json`` manifest binding all ten Solution nodes. Used by the
demos and the end-to-end tests; everything in it is deterministic for a
fixed seed.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from firecase.data_eval import evaluate_dataset, load_audit_pairs
from firecase.detector import baseline_spec, run_batch
from firecase.evidence import EvidenceKind, EvidenceRegistry
from firecase.findings import Severity
from firecase.metrics import classify_sample, summarize_verdicts
from firecase.raster import FireMask, Split
from firecase.requirements import (
    RequirementSet,
    load_canonical_requirements,
    serialize_requirements,
)
from firecase.simulate import (
    ConstellationConfig,
    FireEvent,
    Scenario,
    simulate_scenario,
    write_pass_log,
)
from firecase.synthetic import build_development_catalog, build_verification_catalog
from firecase.verification import (
    build_case_matrix,
    coverage_report,
    independence_check,
    run_campaign,
)

FIXED_TIMESTAMP = "2026-08-21T00:00:00+00:00"
DEV_TEAM = "ml-dev"

_REQUIREMENTS_RATIONALE = """\
# ML safety requirement rationale

The system safety requirements allocate the hazard of unalerted wildfire
growth to the detection component. MLSR1 bounds the boundary offset of any
reported mask at 6 px because at 30 m/px the resulting 180 m worst-case
position error stays inside the 200 m geolocation budget. MLSR2's 0.95
detection-rate floor comes from the system-level exposure analysis; MLSR3
caps false alarms at 52 per month so the response channel is not saturated;
MLSR4 requires those rates to hold across the operating-context taxonomy
rather than only in aggregate.
"""

_DATA_RATIONALE = """\
# ML data requirement rationale

DR1-DR3 pin relevance: tiles must come from the operating context, at the
canonical 48x48x3 geometry, from near-nadir captures. DR4-DR5 pin
completeness over the in-context class combinations and both fire states.
DR6-DR9 pin label accuracy against independently audited reference extents,
with the 6 px bound shared with MLSR1. DR10 pins class balance so no
in-context class is unrepresented or vanishingly rare.
"""

_DEVELOPMENT_LOG = """\
# Model development log

Candidate architectures were screened on the development split only.
The shipped configuration is the thresholded band-ratio baseline with the
calibrated operating point frozen in the packaged defaults; its margin
calibration and the rejected alternatives (per-land thresholds, wider
saturation guard) are recorded here with the internal test results that
motivated each choice. No verification tiles were consulted at any point.
"""


def compact_requirements(*, lands: int = 2, clouds: int = 2) -> RequirementSet:
    """Canonical requirements with the taxonomy cut down for fast fixtures.

    Keeps the first ``lands`` in-context land types and ``clouds`` cloud
    classes, one class in every other dimension; everything else is marked
    out-of-context. MLSRs, system requirements, data requirements and trace
    links are untouched.
    """
    rs = load_canonical_requirements()
    keep = {
        "LandType": lands,
        "FireSize": 1,
        "FireIntensity": 1,
        "Clouds": clouds,
        "TimeOfDay": 1,
        "TimeOfYear": 1,
    }
    dims = []
    for dim in rs.dimensions:
        want = keep[dim.name.value]
        in_ctx = [c for c in dim.classes if c.in_context][:want]
        rest = [c for c in dim.classes if c not in in_ctx]
        out = [dataclasses.replace(c, in_context=False) for c in rest]
        dims.append(dataclasses.replace(dim, classes=tuple(in_ctx + out)))
    return dataclasses.replace(rs, dimensions=tuple(dims))


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _internal_test_results(catalog, spec) -> dict:
    entries = catalog.in_split(Split.INTERNAL_TEST_1) + catalog.in_split(Split.INTERNAL_TEST_2)
    tiles = [e.load_tile() for e in entries]
    outputs = run_batch(spec, tiles)
    verdicts = []
    for entry, output in zip(entries, outputs):
        if entry.mask_path:
            truth = entry.load_truth()
        else:
            truth = FireMask(np.zeros_like(output.mask.values))
        verdicts.append(classify_sample(output.mask, truth, tile_id=entry.meta.tile_id))
    summary = summarize_verdicts(verdicts)
    return {
        "schema_version": 1,
        "passed": summary.fn_count == 0 and summary.fp_count == 0,
        "total": summary.total,
        "fn_count": summary.fn_count,
        "fp_count": summary.fp_count,
        "fn_rate_pct": summary.fn_rate_pct,
        "fp_rate_pct": summary.fp_rate_pct,
        "mean_iou": round(summary.mean_iou, 6),
        "splits": [Split.INTERNAL_TEST_1.value, Split.INTERNAL_TEST_2.value],
    }


def build_fixture_project(
    root: str | Path,
    *,
    seed: int = 7,
    include_deployment: bool = True,
    no_fire_per_split: int = 3,
) -> Path:
    """Generate the full project under ``root``; returns the manifest path."""
    root = Path(root)
    root.mkdir(parents=True, exist_ok=True)

    rs = compact_requirements()
    (root / "requirements.json").write_text(serialize_requirements(rs), encoding="utf-8")

    dev_root = root / "development"
    dev_catalog = build_development_catalog(
        dev_root, seed=seed, requirements=rs, no_fire_per_split=no_fire_per_split
    )
    ver_root = root / "verification"
    ver_catalog = build_verification_catalog(ver_root, seed=seed + 1, requirements=rs)

    art = root / "artifacts"
    art.mkdir(exist_ok=True)

    (art / "requirements-rationale.md").write_text(_REQUIREMENTS_RATIONALE, encoding="utf-8")
    (art / "data-rationale.md").write_text(_DATA_RATIONALE, encoding="utf-8")
    (art / "development-log.md").write_text(_DEVELOPMENT_LOG, encoding="utf-8")

    audit_pairs = load_audit_pairs(dev_catalog, dev_root / "masks")
    report = evaluate_dataset(dev_catalog, requirements=rs, audit_pairs=audit_pairs)
    _write_json(art / "data-eval.json", report.to_json())

    spec = baseline_spec()
    _write_json(art / "internal-tests.json", _internal_test_results(dev_catalog, spec))

    matrix = build_case_matrix(ver_catalog, requirements=rs)
    campaign = run_campaign(matrix, spec, ver_catalog, requirements=rs)
    _write_json(art / "campaign.json", campaign.to_json())
    _write_json(art / "coverage.json", coverage_report(matrix))

    independence = independence_check(ver_catalog, dev_team=DEV_TEAM)
    _write_json(
        art / "provenance.json",
        {
            "schema_version": 1,
            "passed": not any(f.severity is Severity.ERROR for f in independence),
            "labeler_team": "ext-verif",
            "findings": [str(f) for f in independence],
        },
    )

    scenario = Scenario(
        constellation=ConstellationConfig(),
        fires=(FireEvent(x_km=120.0, y_km=6.0), FireEvent(x_km=280.0, y_km=14.0)),
        seed=seed,
        passes=3,
    )
    sim = simulate_scenario(scenario)
    pct = sim.response_percentiles()
    _write_json(
        art / "integration.json",
        {
            "schema_version": 1,
            "passed": not sim.undetected_fires and pct["max"] is not None,
            "summary": sim.summary_json(),
        },
    )
    write_pass_log(sim.events, art / "passlog.jsonl")

    registry = EvidenceRegistry(root=root)

    def reg(name: str, kind: EvidenceKind, producer: str) -> str:
        return registry.register(art / name, kind, producer, timestamp=FIXED_TIMESTAMP).id

    bindings = {
        "Sn2.1": reg("requirements-rationale.md", EvidenceKind.REQUIREMENTS_RATIONALE, "safety"),
        "Sn3.1": reg("data-rationale.md", EvidenceKind.REQUIREMENTS_RATIONALE, "safety"),
        "Sn3.2": reg("data-eval.json", EvidenceKind.DATA_EVALUATION_REPORT, "eval-data"),
        "Sn4.1": reg("internal-tests.json", EvidenceKind.INTERNAL_TEST_RESULTS, DEV_TEAM),
        "Sn4.2": reg("development-log.md", EvidenceKind.DEVELOPMENT_LOG, DEV_TEAM),
        "Sn5.1": reg("campaign.json", EvidenceKind.VERIFICATION_RESULTS, "ext-verif"),
        "Sn5.2": reg("coverage.json", EvidenceKind.VERIFICATION_RESULTS, "ext-verif"),
        "Sn5.3": reg("provenance.json", EvidenceKind.REQUIREMENTS_RATIONALE, "ext-verif"),
    }
    if include_deployment:
        bindings["Sn6.1"] = reg("integration.json", EvidenceKind.INTEGRATION_RESULTS, "integration")
        bindings["Sn6.2"] = reg("passlog.jsonl", EvidenceKind.PASS_LOG, "simulate")

    registry.save(root / "evidence.json")

    manifest = {
        "schema_version": 1,
        "requirements": "requirements.json",
        "fragments": "builtin",
        "include_deployment": include_deployment,
        "evidence_registry": "evidence.json",
        "bindings": bindings,
    }
    manifest_path = root / "project.json"
    _write_json(manifest_path, manifest)
    return manifest_path
