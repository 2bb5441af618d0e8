"""Dataset evaluation against the data requirements (DR1-DR10).

The report covers every data requirement in the loaded requirement set
exactly once and fails closed: a requirement nobody wrote an evaluator
for is a Fail, not a silent gap.

Accuracy (DR6-DR9) is judged against *audited* reference extents, not
against the labels themselves: labels cannot self-certify, so an audit
workflow pairs a sample of label masks with independently produced
reference masks. An empty audit set downgrades DR6-DR9 to Warning
(accuracy unverifiable) rather than passing them.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np

from firecase.metrics import boundary_offset
from firecase.raster import (
    CANONICAL_TILE_SIZE,
    CatalogError,
    DatasetCatalog,
    FireMask,
    read_mask,
)
from firecase.requirements import (
    DataRequirement,
    DimensionName,
    RequirementSet,
    enumerate_in_context_combinations,
    load_canonical_requirements,
)

MAX_OFFENDERS_IN_TEXT = 8


class Verdict(Enum):
    PASS = "Pass"
    FAIL = "Fail"
    WARNING = "Warning"


@dataclass(frozen=True)
class EvalConfig:
    """Operational knobs the requirements leave open.

    ``min_coverage`` is the DR4 pass bar (fraction of in-context
    combinations that must appear); ``min_share`` is the DR10 balance
    floor for any in-context class and for the fire/no-fire split.
    """

    min_coverage: float = 1.0
    min_share: float = 0.02

    def __post_init__(self) -> None:
        if not 0.0 <= self.min_coverage <= 1.0:
            raise ValueError(f"min_coverage must be in [0, 1], got {self.min_coverage}")
        if not 0.0 <= self.min_share <= 1.0:
            raise ValueError(f"min_share must be in [0, 1], got {self.min_share}")


@dataclass(frozen=True)
class LabelAuditPair:
    """One audited tile: the shipped label mask vs the audited extent."""

    tile_id: str
    label_mask: FireMask
    reference_extent: FireMask

    def __post_init__(self) -> None:
        if self.label_mask.values.shape != self.reference_extent.values.shape:
            raise ValueError(
                f"audit pair {self.tile_id!r}: label is "
                f"{self.label_mask.values.shape}, reference is "
                f"{self.reference_extent.values.shape}"
            )


@dataclass(frozen=True)
class DrResult:
    dr_id: str
    category: str
    verdict: Verdict
    detail: str
    metrics: Mapping[str, Any] = field(default_factory=dict)
    offenders: tuple[str, ...] = ()

    def to_json(self) -> dict[str, Any]:
        return {
            "dr_id": self.dr_id,
            "category": self.category,
            "verdict": self.verdict.value,
            "detail": self.detail,
            "metrics": dict(self.metrics),
            "offenders": list(self.offenders),
        }


@dataclass(frozen=True)
class DataEvaluationReport:
    results: tuple[DrResult, ...]

    @property
    def passed(self) -> bool:
        return all(r.verdict is not Verdict.FAIL for r in self.results)

    @property
    def warnings(self) -> tuple[DrResult, ...]:
        return tuple(r for r in self.results if r.verdict is Verdict.WARNING)

    def result(self, dr_id: str) -> DrResult:
        for r in self.results:
            if r.dr_id == dr_id:
                return r
        raise KeyError(dr_id)

    def to_json(self) -> dict[str, Any]:
        return {
            "schema_version": 1,
            "passed": self.passed,
            "results": [r.to_json() for r in self.results],
        }

    def to_text(self) -> str:
        fails = sum(1 for r in self.results if r.verdict is Verdict.FAIL)
        warns = len(self.warnings)
        lines = [
            "Data evaluation: {} ({} requirements, {} fail, {} warning)".format(
                "PASSED" if self.passed else "FAILED", len(self.results), fails, warns
            )
        ]
        for r in self.results:
            lines.append(f"  {r.dr_id:<5} {r.category:<13} {r.verdict.value:<8} {r.detail}")
            shown = r.offenders[:MAX_OFFENDERS_IN_TEXT]
            for offender in shown:
                lines.append(f"           - {offender}")
            hidden = len(r.offenders) - len(shown)
            if hidden > 0:
                lines.append(f"           ... and {hidden} more")
        return "\n".join(lines) + "\n"


# --- individual evaluators ----------------------------------------------------


def _dr1(catalog: DatasetCatalog, rs: RequirementSet) -> tuple[Verdict, str, dict, tuple]:
    out_labels = set(rs.dimension(DimensionName.LAND_TYPE).out_of_context_labels())
    offenders = tuple(
        f"{e.meta.tile_id} (LandType={e.meta.class_labels['LandType']})"
        for e in catalog
        if e.meta.class_labels.get("LandType") in out_labels
    )
    metrics = {"tiles": len(catalog), "out_of_context_land": len(offenders)}
    if offenders:
        return Verdict.FAIL, f"{len(offenders)} tiles on out-of-context land types", metrics, offenders
    return Verdict.PASS, f"all {len(catalog)} tiles on in-context land types", metrics, ()


def _dr2(catalog: DatasetCatalog) -> tuple[Verdict, str, dict, tuple]:
    n = CANONICAL_TILE_SIZE
    offenders = tuple(
        f"{e.meta.tile_id} ({e.width}x{e.height}x{e.bands})"
        for e in catalog
        if not (e.width == n and e.height == n and e.bands == 3)
    )
    metrics = {"tiles": len(catalog), "non_canonical": len(offenders)}
    if offenders:
        return Verdict.FAIL, f"{len(offenders)} tiles are not {n}x{n}x3", metrics, offenders
    return Verdict.PASS, f"all {len(catalog)} tiles are {n}x{n}x3", metrics, ()


def _dr3(catalog: DatasetCatalog) -> tuple[Verdict, str, dict, tuple]:
    offenders = tuple(
        e.meta.tile_id for e in catalog if not e.meta.nadir_representative
    )
    metrics = {"tiles": len(catalog), "non_nadir": len(offenders)}
    if offenders:
        return Verdict.FAIL, f"{len(offenders)} tiles not nadir-representative", metrics, offenders
    return Verdict.PASS, "all tiles nadir-representative", metrics, ()


def _combo_key(labels: Mapping[str, str], dims: Sequence[str]) -> tuple[str, ...]:
    return tuple(labels[d] for d in dims)


def _dr4(
    catalog: DatasetCatalog, rs: RequirementSet, min_coverage: float
) -> tuple[Verdict, str, dict, tuple]:
    enumeration = enumerate_in_context_combinations(rs)
    dims = [d.name.value for d in rs.dimensions]
    wanted = {tuple(c.as_dict()[d] for d in dims) for c in enumeration.combinations}
    seen = set()
    for entry in catalog:
        key = _combo_key(entry.meta.class_labels, dims)
        if key in wanted:
            seen.add(key)
    covered, total = len(seen), len(wanted)
    coverage = covered / total if total else 1.0
    missing = sorted(wanted - seen)
    offenders = tuple(
        ", ".join(f"{d}={v}" for d, v in zip(dims, key)) for key in missing[:50]
    )
    metrics = {"covered": covered, "total": total, "coverage": coverage}
    detail = f"covered {covered}/{total} in-context combinations"
    if coverage >= min_coverage:
        return Verdict.PASS, detail, metrics, ()
    return Verdict.FAIL, detail + f" (< {min_coverage:.0%} required)", metrics, offenders


def _dr5(catalog: DatasetCatalog) -> tuple[Verdict, str, dict, tuple]:
    by_split: dict[str, dict[bool, int]] = {}
    for entry in catalog:
        counts = by_split.setdefault(entry.meta.split.value, {True: 0, False: 0})
        counts[entry.meta.has_fire] += 1
    offenders = []
    table = {}
    for split, counts in sorted(by_split.items()):
        table[split] = {"fire": counts[True], "no_fire": counts[False]}
        if counts[True] == 0:
            offenders.append(f"{split}: no fire tiles")
        if counts[False] == 0:
            offenders.append(f"{split}: no no-fire tiles")
    metrics = {"splits": table}
    if not by_split:
        return Verdict.FAIL, "catalog has no tiles", metrics, ()
    if offenders:
        return Verdict.FAIL, "some splits lack fire or no-fire samples", metrics, tuple(offenders)
    return Verdict.PASS, "every split has fire and no-fire samples", metrics, ()


_NO_AUDIT = "no audited label pairs supplied; accuracy unverifiable"


def _dr6(pairs: Sequence[LabelAuditPair]) -> tuple[Verdict, str, dict, tuple]:
    if not pairs:
        return Verdict.WARNING, _NO_AUDIT, {"pairs": 0}, ()
    offenders = []
    for p in pairs:
        ref = p.reference_extent.values.astype(bool)
        label = p.label_mask.values.astype(bool)
        uncovered = int((ref & ~label).sum())
        if uncovered:
            offenders.append(f"{p.tile_id}: {uncovered} reference fire px outside label")
    metrics = {"pairs": len(pairs), "violations": len(offenders)}
    if offenders:
        return Verdict.FAIL, "labels do not cover the audited fire extent", metrics, tuple(offenders)
    return Verdict.PASS, f"labels cover the fire extent in all {len(pairs)} audited pairs", metrics, ()


def _bbox_size(mask: FireMask) -> tuple[int, int]:
    rows, cols = np.nonzero(mask.values)
    if rows.size == 0:
        return 0, 0
    return int(rows.max() - rows.min() + 1), int(cols.max() - cols.min() + 1)


def _dr7(pairs: Sequence[LabelAuditPair], max_px: int) -> tuple[Verdict, str, dict, tuple]:
    if not pairs:
        return Verdict.WARNING, _NO_AUDIT, {"pairs": 0}, ()
    offenders = []
    for p in pairs:
        lh, lw = _bbox_size(p.label_mask)
        rh, rw = _bbox_size(p.reference_extent)
        excess_h, excess_w = lh - rh, lw - rw
        if excess_h > max_px or excess_w > max_px:
            offenders.append(
                f"{p.tile_id}: label bbox exceeds reference by "
                f"{max(excess_h, 0)}x{max(excess_w, 0)} px"
            )
    metrics = {"pairs": len(pairs), "violations": len(offenders), "max_px": max_px}
    if offenders:
        return Verdict.FAIL, f"label bboxes exceed reference by more than {max_px} px", metrics, tuple(offenders)
    return Verdict.PASS, f"label bboxes within {max_px} px of reference in all audited pairs", metrics, ()


def _dr8(pairs: Sequence[LabelAuditPair]) -> tuple[Verdict, str, dict, tuple]:
    if not pairs:
        return Verdict.WARNING, _NO_AUDIT, {"pairs": 0}, ()
    offenders = tuple(
        p.tile_id
        for p in pairs
        if p.reference_extent.has_fire and not p.label_mask.has_fire
    )
    metrics = {"pairs": len(pairs), "violations": len(offenders)}
    if offenders:
        return Verdict.FAIL, "audited fires with all-non-fire labels", metrics, offenders
    return Verdict.PASS, "no audited fire is labeled all-non-fire", metrics, ()


def _dr9(pairs: Sequence[LabelAuditPair], max_px: int) -> tuple[Verdict, str, dict, tuple]:
    if not pairs:
        return Verdict.WARNING, _NO_AUDIT, {"pairs": 0}, ()
    offenders = []
    scored = 0
    for p in pairs:
        if not p.reference_extent.has_fire:
            continue  # offset undefined without a reference fire
        scored += 1
        offset = boundary_offset(p.label_mask, p.reference_extent)
        if offset >= max_px:
            offenders.append(f"{p.tile_id}: boundary offset {offset:.2f} px")
    metrics = {"pairs": len(pairs), "scored": scored, "violations": len(offenders), "max_px": max_px}
    if offenders:
        return Verdict.FAIL, f"label boundaries at least {max_px} px from reference", metrics, tuple(offenders)
    return Verdict.PASS, f"label boundaries within {max_px} px in all {scored} scored pairs", metrics, ()


def _dr10(
    catalog: DatasetCatalog, rs: RequirementSet, min_share: float
) -> tuple[Verdict, str, dict, tuple]:
    total = len(catalog)
    table: dict[str, dict[str, int]] = {}
    zero, thin = [], []
    for dim in rs.dimensions:
        counts = {label: 0 for label in dim.in_context_labels()}
        for entry in catalog:
            label = entry.meta.class_labels.get(dim.name.value)
            if label in counts:
                counts[label] += 1
        table[dim.name.value] = counts
        for label, count in counts.items():
            if count == 0:
                zero.append(f"{dim.name.value}={label}: 0 samples")
            elif total and count / total < min_share:
                thin.append(f"{dim.name.value}={label}: share {count / total:.3f}")
    fire = sum(1 for e in catalog if e.meta.has_fire)
    no_fire = total - fire
    fire_share = fire / total if total else 0.0
    no_fire_share = no_fire / total if total else 0.0
    if total == 0:
        zero.append("catalog has no tiles")
    else:
        if fire == 0:
            zero.append("has_fire=True: 0 samples")
        elif fire_share < min_share:
            thin.append(f"has_fire=True: share {fire_share:.3f}")
        if no_fire == 0:
            zero.append("has_fire=False: 0 samples")
        elif no_fire_share < min_share:
            thin.append(f"has_fire=False: share {no_fire_share:.3f}")
    metrics = {
        "tiles": total,
        "fire": fire,
        "no_fire": no_fire,
        "min_share": min_share,
        "class_counts": table,
    }
    if zero:
        return Verdict.FAIL, "in-context classes with zero samples", metrics, tuple(zero + thin)
    if thin:
        return Verdict.WARNING, f"classes below the {min_share:.0%} share floor", metrics, tuple(thin)
    return Verdict.PASS, "every in-context class represented above the share floor", metrics, ()


# --- dispatch -----------------------------------------------------------------


@dataclass(frozen=True)
class _Ctx:
    catalog: DatasetCatalog
    rs: RequirementSet
    pairs: tuple[LabelAuditPair, ...]
    config: EvalConfig


def _max_px(req: DataRequirement, default: int = 6) -> int:
    return int(req.params.get("max_px", default))


_EVALUATORS: dict[str, Callable[[_Ctx, DataRequirement], tuple]] = {
    "DR1": lambda ctx, req: _dr1(ctx.catalog, ctx.rs),
    "DR2": lambda ctx, req: _dr2(ctx.catalog),
    "DR3": lambda ctx, req: _dr3(ctx.catalog),
    "DR4": lambda ctx, req: _dr4(ctx.catalog, ctx.rs, ctx.config.min_coverage),
    "DR5": lambda ctx, req: _dr5(ctx.catalog),
    "DR6": lambda ctx, req: _dr6(ctx.pairs),
    "DR7": lambda ctx, req: _dr7(ctx.pairs, _max_px(req)),
    "DR8": lambda ctx, req: _dr8(ctx.pairs),
    "DR9": lambda ctx, req: _dr9(ctx.pairs, _max_px(req)),
    "DR10": lambda ctx, req: _dr10(ctx.catalog, ctx.rs, ctx.config.min_share),
}


def evaluate_dataset(
    catalog: DatasetCatalog,
    *,
    requirements: RequirementSet | None = None,
    audit_pairs: Iterable[LabelAuditPair] = (),
    config: EvalConfig = EvalConfig(),
) -> DataEvaluationReport:
    """Evaluate the catalog against every data requirement in the set.

    Covers each DR id exactly once, in declaration order. A DR with no
    registered evaluator fails closed.
    """
    rs = requirements if requirements is not None else load_canonical_requirements()
    ctx = _Ctx(catalog, rs, tuple(audit_pairs), config)
    results = []
    for req in rs.data:
        evaluator = _EVALUATORS.get(req.id)
        if evaluator is None:
            results.append(
                DrResult(
                    req.id,
                    req.category.value,
                    Verdict.FAIL,
                    f"no evaluator registered for {req.id}",
                )
            )
            continue
        verdict, detail, metrics, offenders = evaluator(ctx, req)
        results.append(
            DrResult(req.id, req.category.value, verdict, detail, metrics, offenders)
        )
    return DataEvaluationReport(tuple(results))


def _req(rs: RequirementSet, dr_id: str) -> DataRequirement:
    for req in rs.data:
        if req.id == dr_id:
            return req
    raise KeyError(dr_id)


def _wrap(rs: RequirementSet, dr_id: str, raw: tuple) -> DrResult:
    req = _req(rs, dr_id)
    verdict, detail, metrics, offenders = raw
    return DrResult(req.id, req.category.value, verdict, detail, metrics, offenders)


def eval_relevance(
    catalog: DatasetCatalog, requirements: RequirementSet | None = None
) -> list[DrResult]:
    rs = requirements if requirements is not None else load_canonical_requirements()
    return [
        _wrap(rs, "DR1", _dr1(catalog, rs)),
        _wrap(rs, "DR2", _dr2(catalog)),
        _wrap(rs, "DR3", _dr3(catalog)),
    ]


def eval_completeness(
    catalog: DatasetCatalog,
    requirements: RequirementSet | None = None,
    *,
    config: EvalConfig = EvalConfig(),
) -> list[DrResult]:
    rs = requirements if requirements is not None else load_canonical_requirements()
    return [
        _wrap(rs, "DR4", _dr4(catalog, rs, config.min_coverage)),
        _wrap(rs, "DR5", _dr5(catalog)),
    ]


def eval_accuracy(
    audit_pairs: Iterable[LabelAuditPair],
    max_px: int = 6,
    *,
    requirements: RequirementSet | None = None,
) -> list[DrResult]:
    rs = requirements if requirements is not None else load_canonical_requirements()
    pairs = tuple(audit_pairs)
    return [
        _wrap(rs, "DR6", _dr6(pairs)),
        _wrap(rs, "DR7", _dr7(pairs, max_px)),
        _wrap(rs, "DR8", _dr8(pairs)),
        _wrap(rs, "DR9", _dr9(pairs, max_px)),
    ]


def eval_balance(
    catalog: DatasetCatalog,
    requirements: RequirementSet | None = None,
    *,
    config: EvalConfig = EvalConfig(),
) -> list[DrResult]:
    rs = requirements if requirements is not None else load_canonical_requirements()
    return [_wrap(rs, "DR10", _dr10(catalog, rs, config.min_share))]


def load_audit_pairs(catalog: DatasetCatalog, reference_dir: str | Path) -> list[LabelAuditPair]:
    """Pair catalog label masks with audited reference masks.

    The audit workflow drops reference masks into a directory as
    ``<tile_id>.fmk``; every reference must match a catalogued tile that
    has a label mask.
    """
    reference_dir = Path(reference_dir)
    pairs = []
    for path in sorted(reference_dir.glob("*.fmk")):
        tile_id = path.stem
        try:
            entry = catalog.entry(tile_id)
        except CatalogError:
            raise ValueError(f"audit reference {path.name} matches no catalogued tile") from None
        if entry.mask_path is None:
            raise ValueError(f"tile {tile_id!r} has an audit reference but no label mask")
        pairs.append(LabelAuditPair(tile_id, read_mask(entry.mask_path), read_mask(path)))
    return pairs
