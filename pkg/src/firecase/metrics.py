"""Quantitative evaluation: IoU, FN/FP classification, boundary offset,
discrete detections, and pass-level rate arithmetic.

Sample-level verdicts follow the two-threshold rule: a sample is a false
negative iff its fire-class IoU is below 0.3, and a false positive iff its
non-fire-class IoU is below 0.99. The empty-empty convention (IoU = 1.0
when both masks have no pixels of the class) makes both rules behave on
all-clear tiles: agreement on absence is perfect agreement.

Pass-level rates divide by detections-plus-misclassifications:
``fn_pct = 100*FN/(D+FN)`` and ``fp_pct = 100*FP/(D+FP)``, where D is the
number of discrete detections in the pass. An alternative false-positive
form dividing by D alone is available via ``fp_form="detections"``; the
two differ (for example 27/948 = 2.85% vs 27/921 = 2.93%) and the
denominator convention of every published figure should be checked before
comparing.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import Iterable, Literal, Sequence

import numpy as np
from scipy import ndimage

from firecase.raster import FireMask

FN_FIRE_IOU_THRESHOLD = 0.3
FP_NONFIRE_IOU_THRESHOLD = 0.99
MLSR1_MAX_OFFSET_PX = 6.0
MONTHLY_FP_BUDGET = 52.0

# 8-connectivity: diagonal neighbours belong to the same detection.
_CONNECTIVITY_8 = np.ones((3, 3), dtype=int)


class MaskClass(Enum):
    FIRE = "fire"
    NONFIRE = "nonfire"


def _check_dims(pred: FireMask, truth: FireMask) -> None:
    if (pred.height, pred.width) != (truth.height, truth.width):
        raise ValueError(
            f"mask dimensions differ: {pred.height}x{pred.width} vs {truth.height}x{truth.width}"
        )


def iou(pred: FireMask, truth: FireMask, cls: MaskClass | str = MaskClass.FIRE) -> float:
    """Intersection over union for one class; empty-empty counts as 1.0."""
    _check_dims(pred, truth)
    cls = MaskClass(cls)
    if cls is MaskClass.FIRE:
        a, b = pred.values == 1, truth.values == 1
    else:
        a, b = pred.values == 0, truth.values == 0
    union = int(np.logical_or(a, b).sum())
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


@dataclass(frozen=True, slots=True)
class IoUScores:
    fire_iou: float
    nonfire_iou: float

    @property
    def mean_iou(self) -> float:
        return (self.fire_iou + self.nonfire_iou) / 2.0


def score_masks(pred: FireMask, truth: FireMask) -> IoUScores:
    return IoUScores(
        fire_iou=iou(pred, truth, MaskClass.FIRE),
        nonfire_iou=iou(pred, truth, MaskClass.NONFIRE),
    )


@dataclass(frozen=True, slots=True)
class VerdictThresholds:
    fn_fire_iou: float = FN_FIRE_IOU_THRESHOLD
    fp_nonfire_iou: float = FP_NONFIRE_IOU_THRESHOLD


@dataclass(frozen=True, slots=True)
class SampleVerdict:
    tile_id: str
    scores: IoUScores
    is_false_negative: bool
    is_false_positive: bool
    boundary_offset_px: float | None


def boundary_offset(pred: FireMask, truth: FireMask) -> float:
    """Worst-case distance (pixels) from predicted fire to the true fire.

    Max over predicted fire pixels of the Euclidean distance to the
    nearest truth fire pixel; 0 when every predicted pixel lies inside the
    truth extent. Requires a non-empty truth fire set.
    """
    _check_dims(pred, truth)
    truth_fire = truth.values == 1
    if not truth_fire.any():
        raise ValueError("boundary offset undefined: truth mask has no fire pixels")
    pred_fire = pred.values == 1
    if not pred_fire.any():
        return 0.0
    # Distance from each pixel to the nearest truth fire pixel.
    distance = ndimage.distance_transform_edt(~truth_fire)
    return float(distance[pred_fire].max())


def classify_sample(
    pred: FireMask,
    truth: FireMask,
    thresholds: VerdictThresholds = VerdictThresholds(),
    *,
    tile_id: str = "",
) -> SampleVerdict:
    """Score one sample and apply the FN/FP threshold rules.

    The boundary offset is computed when both masks contain fire pixels
    and is None otherwise (it is undefined without truth fire, and 0-by-
    convention cases carry no alignment information).
    """
    _check_dims(pred, truth)
    scores = score_masks(pred, truth)
    offset: float | None = None
    if truth.has_fire and pred.has_fire:
        offset = boundary_offset(pred, truth)
    return SampleVerdict(
        tile_id=tile_id,
        scores=scores,
        is_false_negative=scores.fire_iou < thresholds.fn_fire_iou,
        is_false_positive=scores.nonfire_iou < thresholds.fp_nonfire_iou,
        boundary_offset_px=offset,
    )


@dataclass(frozen=True, slots=True)
class DetectionComponent:
    pixels: tuple[tuple[int, int], ...]
    centroid: tuple[float, float]

    @property
    def size(self) -> int:
        return len(self.pixels)


@dataclass(frozen=True, slots=True)
class DetectionComponents:
    count: int
    components: tuple[DetectionComponent, ...]


def discrete_detections(mask: FireMask) -> DetectionComponents:
    """8-connected components of fire pixels: the countable detections."""
    labels, count = ndimage.label(mask.values, structure=_CONNECTIVITY_8)
    components = []
    for index in range(1, count + 1):
        rows, cols = np.nonzero(labels == index)
        pixels = tuple(zip(rows.tolist(), cols.tolist()))
        centroid = (float(rows.mean()), float(cols.mean()))
        components.append(DetectionComponent(pixels=pixels, centroid=centroid))
    return DetectionComponents(count=int(count), components=tuple(components))


@dataclass(frozen=True, slots=True)
class PassCounts:
    detections: int
    false_negatives: int
    false_positives: int

    def __post_init__(self) -> None:
        for name, value in (
            ("detections", self.detections),
            ("false_negatives", self.false_negatives),
            ("false_positives", self.false_positives),
        ):
            if value < 0:
                raise ValueError(f"{name} must be >= 0, got {value}")


@dataclass(frozen=True, slots=True)
class PassRates:
    fn_pct: float
    fp_pct: float

    def display(self) -> tuple[str, str]:
        return (format_pct(self.fn_pct), format_pct(self.fp_pct))


def format_pct(value: float, places: int = 2) -> str:
    """Half-up decimal rounding for display; full precision stays internal."""
    quant = Decimal(1).scaleb(-places)
    return str(Decimal(repr(value)).quantize(quant, rounding=ROUND_HALF_UP))


def pass_rates(
    counts: PassCounts, *, fp_form: Literal["mixed", "detections"] = "mixed"
) -> PassRates:
    """Percentage FN/FP rates for one integration-test pass.

    ``mixed`` (default): each rate divides by detections plus that error
    count, D+FN and D+FP respectively. ``detections``: the false-positive
    rate divides by D alone (the false-negative form is unchanged).
    Denominators must be positive.
    """
    d, fn, fp = counts.detections, counts.false_negatives, counts.false_positives
    if d + fn == 0:
        raise ValueError("fn rate undefined: detections + false negatives is zero")
    fn_pct = 100.0 * fn / (d + fn)
    if fp_form == "mixed":
        if d + fp == 0:
            raise ValueError("fp rate undefined: detections + false positives is zero")
        fp_pct = 100.0 * fp / (d + fp)
    elif fp_form == "detections":
        if d == 0:
            raise ValueError("fp rate undefined: detections is zero")
        fp_pct = 100.0 * fp / d
    else:
        raise ValueError(f"unknown fp_form {fp_form!r}")
    return PassRates(fn_pct=fn_pct, fp_pct=fp_pct)


@dataclass(frozen=True, slots=True)
class MonthlyFpEstimate:
    fp_per_frame: float
    frames_per_month: int
    expected_fp_per_month: float
    budget: float
    compliant: bool


def monthly_fp(
    fp_per_frame: float, frames_per_month: int, budget: float = MONTHLY_FP_BUDGET
) -> MonthlyFpEstimate:
    """Expected false positives per month vs the monthly budget.

    Compliant at expected <= budget: the requirement forbids *more than*
    the budget, so the boundary value itself complies.
    """
    if not 0.0 <= fp_per_frame <= 1.0:
        raise ValueError(f"fp_per_frame must be a probability, got {fp_per_frame}")
    if frames_per_month < 0:
        raise ValueError(f"frames_per_month must be >= 0, got {frames_per_month}")
    expected = fp_per_frame * frames_per_month
    return MonthlyFpEstimate(
        fp_per_frame=fp_per_frame,
        frames_per_month=frames_per_month,
        expected_fp_per_month=expected,
        budget=budget,
        compliant=expected <= budget,
    )


@dataclass(frozen=True, slots=True)
class VerdictSummary:
    total: int
    fn_count: int
    fp_count: int
    fn_rate_pct: float
    fp_rate_pct: float
    mean_iou: float


def summarize_verdicts(verdicts: Sequence[SampleVerdict]) -> VerdictSummary:
    """Aggregate sample verdicts; rates are per-sample percentages."""
    total = len(verdicts)
    if total == 0:
        raise ValueError("cannot summarize zero verdicts")
    fn = sum(1 for v in verdicts if v.is_false_negative)
    fp = sum(1 for v in verdicts if v.is_false_positive)
    mean = sum(v.scores.mean_iou for v in verdicts) / total
    return VerdictSummary(
        total=total,
        fn_count=fn,
        fp_count=fp,
        fn_rate_pct=100.0 * fn / total,
        fp_rate_pct=100.0 * fp / total,
        mean_iou=mean,
    )


RESULT_CSV_COLUMNS = (
    "tile_id",
    "fire_iou",
    "nonfire_iou",
    "mean_iou",
    "fn",
    "fp",
    "boundary_offset_px",
)


def verdicts_to_csv(verdicts: Iterable[SampleVerdict]) -> str:
    """One row per sample, columns per :data:`RESULT_CSV_COLUMNS`."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RESULT_CSV_COLUMNS)
    for v in verdicts:
        writer.writerow(
            [
                v.tile_id,
                repr(v.scores.fire_iou),
                repr(v.scores.nonfire_iou),
                repr(v.scores.mean_iou),
                int(v.is_false_negative),
                int(v.is_false_positive),
                "" if v.boundary_offset_px is None else repr(v.boundary_offset_px),
            ]
        )
    return buffer.getvalue()


def pass_summary_json(counts: PassCounts, rates: PassRates) -> str:
    """Pass-level summary for reports; full precision plus display strings."""
    fn_str, fp_str = rates.display()
    payload = {
        "schema_version": 1,
        "counts": {
            "detections": counts.detections,
            "false_negatives": counts.false_negatives,
            "false_positives": counts.false_positives,
        },
        "rates": {
            "fn_pct": rates.fn_pct,
            "fp_pct": rates.fp_pct,
            "fn_pct_display": fn_str,
            "fp_pct_display": fp_str,
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
