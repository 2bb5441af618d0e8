"""Deterministic synthetic imagery: fixtures for calibration, campaigns, demos.

Nothing here claims physical fidelity. The generator exists to give the
toolchain a reproducible population with *known* separation between fire
and background, so thresholds can be calibrated by measurement instead of
invented as ground truth, and campaign fixtures can plant fires whose truth
masks are exact by construction.

Population envelopes (reflectance units, enforced by construction):

* backgrounds per land type: SWIR1 from a per-land base with +/-25% noise,
  SWIR2 = SWIR1 * U[0.55, 1.25] (band ratio <= 1.25), SWIR2 stays < 0.5;
* clouds: bright in Blue, SWIR2 = SWIR1 * U[0.8, 1.1];
* moderate fires: SWIR2 in [0.8, 1.2] with SWIR2/SWIR1 in [2.0, 3.5];
* hot cores: SWIR2 in [2.5, 4.0] with a ratio that may fall to 1.1
  (saturation makes the ratio unreliable, which is why the baseline rule
  has a separate saturation clause).

Fires are planted with at least :data:`FIRE_MARGIN_PX` pixels of clearance
from the tile edge, so a mask shifted by up to ``FIRE_MARGIN_PX - 1`` pixels
stays inside the tile (used by detector-sabotage tests).

All randomness flows through a caller-supplied ``numpy`` Generator; a fixed
seed reproduces every tile bit-exactly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from firecase.detector import BaselineParams, baseline_predicate
from firecase.raster import (
    CANONICAL_TILE_SIZE,
    CloudBucket,
    DatasetCatalog,
    FireMask,
    FireSizeBucket,
    MultiSpectralTile,
    Provenance,
    Split,
    TileMetadata,
    catalog_dataset,
    write_catalog_metadata,
    write_mask,
    write_tile,
)
from firecase.requirements import DimensionName, RequirementSet, load_canonical_requirements

FIRE_MARGIN_PX = 8

# Per-land SWIR1 bases; chosen so background SWIR2 never exceeds
# base * 1.25 * 1.25 < 0.5 even at the noisiest pixel.
_LAND_BASES: dict[str, tuple[float, float]] = {
    # land type -> (blue base, swir1 base)
    "Temperate rainforest": (0.06, 0.10),
    "Agricultural": (0.10, 0.22),
    "Urban": (0.18, 0.26),
    "Industrial": (0.20, 0.28),
    "Grassland": (0.12, 0.24),
    "Desert": (0.30, 0.30),
    "Sea": (0.04, 0.02),
}

_DEFAULT_TEAM = "ext-verif"
DEV_TEAM = "ml-dev"


class FirePopulation(Enum):
    MODERATE = "moderate"
    HOT = "hot"


@dataclass(frozen=True, slots=True)
class FirePlan:
    """One rectangular fire to plant: position is the top-left corner."""

    row: int
    col: int
    height: int
    width: int
    population: FirePopulation

    def __post_init__(self) -> None:
        if self.height < 1 or self.width < 1:
            raise ValueError("fire extent must be at least 1x1")
        if self.row < 0 or self.col < 0:
            raise ValueError("fire position must be non-negative")


class SyntheticError(ValueError):
    pass


def _background(
    land_type: str, size: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    try:
        blue_base, swir1_base = _LAND_BASES[land_type]
    except KeyError:
        raise SyntheticError(
            f"no background model for land type {land_type!r}; "
            f"known: {', '.join(sorted(_LAND_BASES))}"
        ) from None
    blue = blue_base * rng.uniform(0.75, 1.25, (size, size))
    swir1 = swir1_base * rng.uniform(0.75, 1.25, (size, size))
    swir2 = swir1 * rng.uniform(0.55, 1.25, (size, size))
    return blue, swir1, swir2


def _paint_cloud(
    blue: np.ndarray, swir1: np.ndarray, swir2: np.ndarray, fraction: float, rng: np.random.Generator
) -> None:
    """Cloud decks fill whole rows from the top; coverage is rows/size."""
    if fraction <= 0:
        return
    size = blue.shape[0]
    rows = min(size, round(fraction * size))
    if rows == 0:
        return
    blue[:rows, :] = rng.uniform(0.70, 0.90, (rows, size))
    swir1[:rows, :] = rng.uniform(0.25, 0.35, (rows, size))
    swir2[:rows, :] = swir1[:rows, :] * rng.uniform(0.80, 1.10, (rows, size))


def _paint_fire(
    swir1: np.ndarray, swir2: np.ndarray, plan: FirePlan, rng: np.random.Generator
) -> None:
    r0, c0 = plan.row, plan.col
    r1, c1 = r0 + plan.height, c0 + plan.width
    if r1 > swir1.shape[0] or c1 > swir1.shape[1]:
        raise SyntheticError(f"fire {plan} extends outside the tile")
    shape = (plan.height, plan.width)
    if plan.population is FirePopulation.MODERATE:
        s2 = rng.uniform(0.8, 1.2, shape)
        ratio = rng.uniform(2.0, 3.5, shape)
    else:
        s2 = rng.uniform(2.5, 4.0, shape)
        ratio = rng.uniform(1.1, 1.8, shape)
    swir2[r0:r1, c0:c1] = s2
    swir1[r0:r1, c0:c1] = s2 / ratio


def synth_tile(
    land_type: str,
    *,
    rng: np.random.Generator,
    tile_id: str = "synthetic",
    size: int = CANONICAL_TILE_SIZE,
    fires: Sequence[FirePlan] = (),
    cloud_fraction: float = 0.0,
) -> tuple[MultiSpectralTile, FireMask]:
    """One synthetic tile plus its exact truth mask.

    Paint order is fixed (background, cloud, fires) so fires are never
    occluded and the truth mask is the union of the planted rectangles.
    """
    blue, swir1, swir2 = _background(land_type, size, rng)
    _paint_cloud(blue, swir1, swir2, cloud_fraction, rng)
    truth = np.zeros((size, size), dtype=np.uint8)
    for plan in fires:
        _paint_fire(swir1, swir2, plan, rng)
        truth[plan.row : plan.row + plan.height, plan.col : plan.col + plan.width] = 1
    bands = np.stack([blue, swir1, swir2]).astype(np.float32)
    return MultiSpectralTile(tile_id, bands), FireMask(truth)


def place_fire(
    rng: np.random.Generator,
    height: int,
    width: int,
    population: FirePopulation,
    *,
    size: int = CANONICAL_TILE_SIZE,
    margin: int = FIRE_MARGIN_PX,
) -> FirePlan:
    """Uniformly place a fire rectangle with ``margin`` px of edge clearance."""
    max_row = size - margin - height
    max_col = size - margin - width
    if max_row < margin or max_col < margin:
        raise SyntheticError(f"{height}x{width} fire cannot keep a {margin} px margin")
    return FirePlan(
        row=int(rng.integers(margin, max_row + 1)),
        col=int(rng.integers(margin, max_col + 1)),
        height=height,
        width=width,
        population=population,
    )


# --- calibration ------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class LabelledTile:
    tile: MultiSpectralTile
    truth: FireMask
    hot: np.ndarray  # boolean, pixels from the hot-core population


@dataclass(frozen=True, slots=True)
class CalibrationSuite:
    tiles: tuple[LabelledTile, ...]


def in_context_land_types(requirements: RequirementSet | None = None) -> tuple[str, ...]:
    rs = requirements if requirements is not None else load_canonical_requirements()
    return rs.dimension(DimensionName.LAND_TYPE).in_context_labels()


def calibration_suite(seed: int, *, tiles_per_scenario: int = 4) -> CalibrationSuite:
    """Labelled population over every land type, cloud level, and fire kind."""
    rng = np.random.default_rng(seed)
    out: list[LabelledTile] = []
    scenarios: list[tuple[Sequence[tuple[int, int, FirePopulation]], float]] = [
        ((), 0.0),
        ((), 0.55),
        (((2, 3, FirePopulation.MODERATE),), 0.0),
        (((1, 1, FirePopulation.MODERATE),), 0.06),
        (((2, 2, FirePopulation.HOT),), 0.0),
        (((4, 5, FirePopulation.MODERATE), (1, 2, FirePopulation.HOT)), 0.06),
    ]
    for land_type in sorted(_LAND_BASES):
        for fire_shapes, cloud in scenarios:
            for index in range(tiles_per_scenario):
                plans = [
                    place_fire(rng, h, w, pop) for h, w, pop in fire_shapes
                ]
                tile, truth = synth_tile(
                    land_type,
                    rng=rng,
                    tile_id=f"cal_{land_type.replace(' ', '-')}_{len(out):04d}",
                    fires=plans,
                    cloud_fraction=cloud,
                )
                hot = np.zeros_like(truth.values, dtype=bool)
                for plan in plans:
                    if plan.population is FirePopulation.HOT:
                        hot[
                            plan.row : plan.row + plan.height,
                            plan.col : plan.col + plan.width,
                        ] = True
                out.append(LabelledTile(tile, truth, hot))
    return CalibrationSuite(tuple(out))


class CalibrationError(RuntimeError):
    """The calibrated thresholds failed their own separation check."""


def calibrate_baseline(suite: CalibrationSuite, *, epsilon: float = 1e-6) -> BaselineParams:
    """Margin-midpoint thresholds measured on the suite.

    Each threshold sits halfway between the two populations it must
    separate: ``swir2_min`` between the brightest non-fire pixel and the
    dimmest moderate-fire pixel, ``ratio_min`` between the highest non-fire
    ratio and the lowest moderate-fire ratio, ``saturation_min`` between
    the brightest non-hot pixel and the dimmest hot-core pixel. The result
    is verified against the whole suite before being returned.
    """
    bg_swir2, bg_ratio = [], []
    mod_swir2, mod_ratio = [], []
    hot_swir2 = []
    for labelled in suite.tiles:
        swir2 = labelled.tile.band("SWIR2")
        ratio = swir2 / (labelled.tile.band("SWIR1") + epsilon)
        fire = labelled.truth.values.astype(bool)
        moderate = fire & ~labelled.hot
        bg_swir2.append(swir2[~fire])
        bg_ratio.append(ratio[~fire])
        if moderate.any():
            mod_swir2.append(swir2[moderate])
            mod_ratio.append(ratio[moderate])
        if labelled.hot.any():
            hot_swir2.append(swir2[labelled.hot])
    if not mod_swir2 or not hot_swir2:
        raise CalibrationError("suite must contain both moderate and hot fire pixels")

    background_swir2_max = float(max(a.max() for a in bg_swir2))
    background_ratio_max = float(max(a.max() for a in bg_ratio))
    moderate_swir2_min = float(min(a.min() for a in mod_swir2))
    moderate_ratio_min = float(min(a.min() for a in mod_ratio))
    non_hot_swir2_max = max(
        background_swir2_max, float(max(a.max() for a in mod_swir2))
    )
    hot_swir2_min = float(min(a.min() for a in hot_swir2))

    params = BaselineParams(
        swir2_min=round((background_swir2_max + moderate_swir2_min) / 2, 6),
        ratio_min=round((background_ratio_max + moderate_ratio_min) / 2, 6),
        saturation_min=round((non_hot_swir2_max + hot_swir2_min) / 2, 6),
        epsilon=epsilon,
    )

    for labelled in suite.tiles:
        predicted = baseline_predicate(labelled.tile, params)
        truth = labelled.truth.values.astype(bool)
        missed = int((truth & ~predicted).sum())
        spurious = int((predicted & ~truth).sum())
        if missed or spurious:
            raise CalibrationError(
                f"calibrated thresholds misclassify tile {labelled.tile.tile_id!r}: "
                f"{missed} fire pixels missed, {spurious} background pixels flagged"
            )
    return params


# --- catalog builders --------------------------------------------------------

# Nominal labels applied to tiles where a robustness dimension has no
# pixel-level rendering (time axes) or does not apply (no-fire tiles carry
# the scenario class their case exercises).
_NOMINAL_TIME_OF_DAY = "Midday 12-14"
_NOMINAL_TIME_OF_YEAR = "Summer"
_NOMINAL_FIRE_SIZE = "30x30m<=Small-medium<60x60m"
_NOMINAL_INTENSITY = "Medium >Schroeder conditions"

_VERIFICATION_CLOUD_FRACTION = {
    CloudBucket.NONE: 0.0,
    CloudBucket.LOW_LT10PCT: 0.06,
    CloudBucket.HIGH_GT50PCT: 0.55,
}
_VERIFICATION_CLOUD_CLASS = {
    CloudBucket.NONE: "None",
    CloudBucket.LOW_LT10PCT: "Low coverage <25% of tile",
    CloudBucket.HIGH_GT50PCT: "50%<=Medium-high coverage<80% of tile",
}
# At 30 m/px a <30 m fire is a single pixel; >100 m needs at least 4 px on
# its long axis.
_VERIFICATION_FIRE_SHAPE = {
    FireSizeBucket.SMALL_LT30M: ((1, 1, FirePopulation.HOT),),
    FireSizeBucket.LARGE_GT100M: (
        (4, 5, FirePopulation.MODERATE),
        (2, 2, FirePopulation.HOT),
    ),
}
_VERIFICATION_FIRE_CLASS = {
    FireSizeBucket.SMALL_LT30M: "Small <30x30m",
    FireSizeBucket.LARGE_GT100M: "Large >=90x90m",
}
_VERIFICATION_INTENSITY_CLASS = {
    FireSizeBucket.SMALL_LT30M: "High >>Schroeder conditions",
    FireSizeBucket.LARGE_GT100M: _NOMINAL_INTENSITY,
}


def _slug(text: str) -> str:
    return text.lower().replace(" ", "-").replace("%", "pct").replace("<", "lt").replace(
        ">", "gt"
    ).replace("=", "e")


def build_verification_catalog(
    root: str | Path,
    *,
    seed: int,
    requirements: RequirementSet | None = None,
    labeler_team: str = _DEFAULT_TEAM,
) -> DatasetCatalog:
    """Write a verification dataset covering every (land, size, cloud) case.

    One tile per combination of in-context land type, fire-size bucket
    (including no-fire), and cloud bucket — 45 combinations for the
    canonical five land types. Truth masks are written for every tile
    (all-zero for no-fire tiles); provenance marks the external team.
    """
    rs = requirements if requirements is not None else load_canonical_requirements()
    root = Path(root)
    rng = np.random.default_rng(seed)
    (root / "tiles").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)

    records: list[TileMetadata] = []
    for land_type in in_context_land_types(rs):
        for size_bucket in FireSizeBucket:
            for cloud_bucket in CloudBucket:
                tile_id = "ver_{}_{}_{}".format(
                    _slug(land_type), _slug(size_bucket.value), _slug(cloud_bucket.value)
                )
                shapes = _VERIFICATION_FIRE_SHAPE.get(size_bucket, ())
                plans = [place_fire(rng, h, w, pop) for h, w, pop in shapes]
                tile, truth = synth_tile(
                    land_type,
                    rng=rng,
                    tile_id=tile_id,
                    fires=plans,
                    cloud_fraction=_VERIFICATION_CLOUD_FRACTION[cloud_bucket],
                )
                write_tile(tile, root / "tiles" / f"{tile_id}.ftl")
                write_mask(truth, root / "masks" / f"{tile_id}.fmk")
                records.append(
                    TileMetadata(
                        tile_id=tile_id,
                        class_labels={
                            "LandType": land_type,
                            "FireSize": _VERIFICATION_FIRE_CLASS.get(
                                size_bucket, _NOMINAL_FIRE_SIZE
                            ),
                            "FireIntensity": _VERIFICATION_INTENSITY_CLASS.get(
                                size_bucket, _NOMINAL_INTENSITY
                            ),
                            "Clouds": _VERIFICATION_CLOUD_CLASS[cloud_bucket],
                            "TimeOfDay": _NOMINAL_TIME_OF_DAY,
                            "TimeOfYear": _NOMINAL_TIME_OF_YEAR,
                        },
                        has_fire=bool(plans),
                        split=Split.VERIFICATION,
                        provenance=Provenance(
                            source="synthetic",
                            labeler_team=labeler_team,
                            collected_by_dev_team=False,
                        ),
                        fire_size_bucket=size_bucket,
                        cloud_bucket=cloud_bucket,
                    )
                )
    write_catalog_metadata(records, root)
    return catalog_dataset(root, taxonomy=rs)


# Rendering choices for the robustness classes that do affect pixels.
_CLASS_CLOUD_FRACTION = {
    "None": 0.0,
    "Low coverage <25% of tile": 0.10,
    "25%<=Low-medium coverage<50% of tile": 0.30,
    "50%<=Medium-high coverage<80% of tile": 0.60,
    "High coverage >80% of tile": 0.90,
}
_CLASS_FIRE_SHAPE = {
    "Small <30x30m": (1, 1),
    "30x30m<=Small-medium<60x60m": (1, 2),
    "60x60m<=Medium-large<90x90m": (2, 3),
    "Large >=90x90m": (4, 4),
}
_CLASS_POPULATION = {
    "Medium >Schroeder conditions": FirePopulation.MODERATE,
    "High >>Schroeder conditions": FirePopulation.HOT,
    "Low <Schroeder conditions": FirePopulation.MODERATE,
}

_DEV_SPLIT_CYCLE = (Split.DEVELOPMENT, Split.INTERNAL_TEST_1, Split.INTERNAL_TEST_2)


def build_development_catalog(
    root: str | Path,
    *,
    seed: int,
    requirements: RequirementSet | None = None,
    no_fire_per_split: int = 15,
    write_masks: bool = True,
) -> DatasetCatalog:
    """Write a dataset covering every in-context robustness combination.

    One fire tile per combination (1800 for the canonical manifest),
    cycled over the three development-side splits, plus ``no_fire_per_split``
    no-fire tiles per split so fire/no-fire balance and DR5 hold. Labels on
    the time axes are metadata-only (no pixel rendering).
    """
    from firecase.requirements import enumerate_in_context_combinations

    rs = requirements if requirements is not None else load_canonical_requirements()
    root = Path(root)
    rng = np.random.default_rng(seed)
    (root / "tiles").mkdir(parents=True, exist_ok=True)
    (root / "masks").mkdir(parents=True, exist_ok=True)

    records: list[TileMetadata] = []

    def emit(tile_id: str, labels: Mapping[str, str], split: Split, fire: bool) -> None:
        land = labels["LandType"]
        plans: list[FirePlan] = []
        if fire:
            height, width = _CLASS_FIRE_SHAPE[labels["FireSize"]]
            population = _CLASS_POPULATION[labels["FireIntensity"]]
            plans.append(place_fire(rng, height, width, population))
        tile, truth = synth_tile(
            land,
            rng=rng,
            tile_id=tile_id,
            fires=plans,
            cloud_fraction=_CLASS_CLOUD_FRACTION[labels["Clouds"]],
        )
        write_tile(tile, root / "tiles" / f"{tile_id}.ftl")
        if write_masks:
            write_mask(truth, root / "masks" / f"{tile_id}.fmk")
        records.append(
            TileMetadata(
                tile_id=tile_id,
                class_labels=dict(labels),
                has_fire=fire,
                split=split,
                provenance=Provenance(
                    source="synthetic", labeler_team=DEV_TEAM, collected_by_dev_team=True
                ),
            )
        )

    combos = enumerate_in_context_combinations(rs).combinations
    for index, combo in enumerate(combos):
        emit(
            f"dev_{index:04d}",
            combo.as_dict(),
            _DEV_SPLIT_CYCLE[index % len(_DEV_SPLIT_CYCLE)],
            fire=True,
        )
    nominal = {
        "LandType": in_context_land_types(rs)[0],
        "FireSize": _NOMINAL_FIRE_SIZE,
        "FireIntensity": _NOMINAL_INTENSITY,
        "Clouds": "None",
        "TimeOfDay": _NOMINAL_TIME_OF_DAY,
        "TimeOfYear": _NOMINAL_TIME_OF_YEAR,
    }
    for split in _DEV_SPLIT_CYCLE:
        for index in range(no_fire_per_split):
            emit(f"nofire_{split.value.lower()}_{index:03d}", nominal, split, fire=False)

    write_catalog_metadata(records, root)
    return catalog_dataset(root, taxonomy=rs)


def fixture_masks_from_truth(catalog: DatasetCatalog) -> dict[str, Path]:
    """Tile-id to truth-mask-path map: the oracle detector's fixture table."""
    masks: dict[str, Path] = {}
    for entry in catalog:
        if entry.mask_path is not None:
            masks[entry.meta.tile_id] = entry.mask_path
    return masks


def shifted_fixture_masks(
    catalog: DatasetCatalog, out_dir: str | Path, *, shift_px: int = 7
) -> dict[str, Path]:
    """Sabotaged fixture table: every truth mask translated down-track.

    Fire pixels move ``shift_px`` columns right (clipped at the edge, which
    the planting margin prevents from mattering). Used to demonstrate that
    the campaign catches alignment failures: a shift of 7 px puts every
    boundary offset at exactly 7, violating the 6 px bound.
    """
    from firecase.raster import read_mask

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    masks: dict[str, Path] = {}
    for entry in catalog:
        if entry.mask_path is None:
            continue
        truth = read_mask(entry.mask_path)
        shifted = np.zeros_like(truth.values)
        if shift_px < truth.values.shape[1]:
            shifted[:, shift_px:] = truth.values[:, : truth.values.shape[1] - shift_px]
        path = out_dir / f"{entry.meta.tile_id}.shifted.fmk"
        write_mask(FireMask(shifted), path)
        masks[entry.meta.tile_id] = path
    return masks
