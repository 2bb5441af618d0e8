"""Synthetic generator: envelopes, calibration, catalog builders."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from firecase.detector import baseline_predicate, default_baseline_params
from firecase.raster import CloudBucket, FireSizeBucket, Split, read_mask
from firecase.requirements import enumerate_in_context_combinations, load_canonical_requirements
from firecase.synthetic import (
    DEV_TEAM,
    FIRE_MARGIN_PX,
    CalibrationError,
    FirePlan,
    FirePopulation,
    SyntheticError,
    build_development_catalog,
    build_verification_catalog,
    calibrate_baseline,
    calibration_suite,
    fixture_masks_from_truth,
    in_context_land_types,
    place_fire,
    shifted_fixture_masks,
    synth_tile,
)

DEFAULTS_PATH = (
    Path(__file__).parent.parent / "src" / "firecase" / "data" / "detector_defaults.json"
)


class TestEnvelopes:
    def test_background_stays_cold(self, rng):
        for land in ("Grassland", "Desert", "Urban", "Sea"):
            tile, truth = synth_tile(land, rng=rng)
            assert not truth.has_fire
            swir2 = tile.band("SWIR2")
            ratio = swir2 / (tile.band("SWIR1") + 1e-6)
            assert swir2.max() < 0.5
            assert ratio.max() <= 1.2500001

    def test_cloud_deck_is_cold_and_sized(self, rng):
        tile, _ = synth_tile("Grassland", rng=rng, cloud_fraction=0.55)
        swir2 = tile.band("SWIR2")
        blue = tile.band("Blue")
        rows = round(0.55 * 48)
        assert (blue[:rows, :] >= 0.70).all()
        assert swir2.max() < 0.5

    def test_moderate_fire_pixels_in_envelope(self, rng):
        plan = FirePlan(10, 10, 3, 4, FirePopulation.MODERATE)
        tile, truth = synth_tile("Agricultural", rng=rng, fires=[plan])
        fire = truth.values.astype(bool)
        assert fire.sum() == 12
        swir2 = tile.band("SWIR2")
        ratio = swir2 / (tile.band("SWIR1") + 1e-6)
        assert swir2[fire].min() >= 0.8
        assert swir2[fire].max() <= 1.2
        assert ratio[fire].min() >= 2.0 - 1e-4

    def test_hot_fire_pixels_in_envelope(self, rng):
        plan = FirePlan(20, 20, 2, 2, FirePopulation.HOT)
        tile, truth = synth_tile("Urban", rng=rng, fires=[plan])
        fire = truth.values.astype(bool)
        swir2 = tile.band("SWIR2")
        assert swir2[fire].min() >= 2.5

    def test_truth_is_exact_union_of_plans(self, rng):
        plans = [
            FirePlan(8, 8, 2, 2, FirePopulation.MODERATE),
            FirePlan(30, 25, 1, 3, FirePopulation.HOT),
        ]
        _, truth = synth_tile("Grassland", rng=rng, fires=plans)
        expected = np.zeros((48, 48), dtype=np.uint8)
        expected[8:10, 8:10] = 1
        expected[30:31, 25:28] = 1
        assert np.array_equal(truth.values, expected)

    def test_out_of_bounds_fire_rejected(self, rng):
        with pytest.raises(SyntheticError, match="outside"):
            synth_tile("Grassland", rng=rng, fires=[FirePlan(46, 46, 4, 4, FirePopulation.HOT)])

    def test_unknown_land_type_rejected(self, rng):
        with pytest.raises(SyntheticError, match="Ocean"):
            synth_tile("Ocean", rng=rng)

    def test_determinism(self):
        a, ta = synth_tile("Desert", rng=np.random.default_rng(5), cloud_fraction=0.3)
        b, tb = synth_tile("Desert", rng=np.random.default_rng(5), cloud_fraction=0.3)
        assert np.array_equal(a.bands, b.bands)
        assert np.array_equal(ta.values, tb.values)

    def test_place_fire_respects_margin(self, rng):
        for _ in range(200):
            plan = place_fire(rng, 4, 5, FirePopulation.MODERATE)
            assert plan.row >= FIRE_MARGIN_PX
            assert plan.col >= FIRE_MARGIN_PX
            assert plan.row + plan.height <= 48 - FIRE_MARGIN_PX
            assert plan.col + plan.width <= 48 - FIRE_MARGIN_PX

    def test_place_fire_rejects_oversized(self, rng):
        with pytest.raises(SyntheticError, match="margin"):
            place_fire(rng, 40, 40, FirePopulation.MODERATE)


class TestCalibration:
    def test_shipped_defaults_reproduce_from_seed(self):
        payload = json.loads(DEFAULTS_PATH.read_text(encoding="utf-8"))
        params = calibrate_baseline(calibration_suite(payload["calibration_seed"]))
        assert params.swir2_min == payload["swir2_min"]
        assert params.ratio_min == payload["ratio_min"]
        assert params.saturation_min == payload["saturation_min"]
        assert default_baseline_params() == params

    def test_calibrated_params_separate_perfectly(self):
        suite = calibration_suite(99)
        params = calibrate_baseline(suite)
        for labelled in suite.tiles:
            predicted = baseline_predicate(labelled.tile, params)
            assert np.array_equal(predicted, labelled.truth.values.astype(bool))

    def test_thresholds_sit_between_populations(self):
        params = calibrate_baseline(calibration_suite(7))
        # background swir2 < 0.5, moderate fire >= 0.8
        assert 0.5 < params.swir2_min < 0.8
        # background ratio <= 1.25, moderate fire >= 2.0
        assert 1.25 < params.ratio_min < 2.0
        # moderate swir2 <= 1.2, hot >= 2.5
        assert 1.2 < params.saturation_min < 2.5

    def test_suite_without_hot_fires_rejected(self):
        suite = calibration_suite(3)
        from firecase.synthetic import CalibrationSuite

        no_hot = CalibrationSuite(
            tuple(t for t in suite.tiles if not t.hot.any() and not t.truth.has_fire)
        )
        with pytest.raises(CalibrationError, match="moderate and hot"):
            calibrate_baseline(no_hot)


@pytest.fixture(scope="module")
def verification_catalog(tmp_path_factory):
    root = tmp_path_factory.mktemp("vercat")
    return build_verification_catalog(root, seed=11), root


class TestVerificationCatalog:
    def test_covers_45_combinations(self, verification_catalog):
        catalog, _ = verification_catalog
        assert len(catalog) == 45
        seen = {
            (e.meta.class_labels["LandType"], e.meta.fire_size_bucket, e.meta.cloud_bucket)
            for e in catalog
        }
        assert len(seen) == 45
        lands = {t[0] for t in seen}
        assert lands == set(in_context_land_types())
        assert {t[1] for t in seen} == set(FireSizeBucket)
        assert {t[2] for t in seen} == set(CloudBucket)

    def test_every_tile_has_truth_mask(self, verification_catalog):
        catalog, _ = verification_catalog
        for entry in catalog:
            assert entry.mask_path is not None
            truth = read_mask(entry.mask_path)
            assert truth.has_fire == entry.meta.has_fire

    def test_no_fire_iff_none_bucket(self, verification_catalog):
        catalog, _ = verification_catalog
        for entry in catalog:
            expected = entry.meta.fire_size_bucket is not FireSizeBucket.NONE
            assert entry.meta.has_fire is expected

    def test_split_and_provenance(self, verification_catalog):
        catalog, _ = verification_catalog
        for entry in catalog:
            assert entry.meta.split is Split.VERIFICATION
            assert entry.meta.provenance.collected_by_dev_team is False
            assert entry.meta.provenance.labeler_team != DEV_TEAM

    def test_cloud_fraction_matches_bucket(self, verification_catalog):
        catalog, _ = verification_catalog
        for entry in catalog:
            tile = entry.load_tile()
            blue = tile.band("Blue")
            cloudy_rows = int((blue >= 0.65).all(axis=1).sum())
            frac = cloudy_rows / 48
            if entry.meta.cloud_bucket is CloudBucket.NONE:
                assert frac == 0.0
            elif entry.meta.cloud_bucket is CloudBucket.LOW_LT10PCT:
                assert 0.0 < frac < 0.10
            else:
                assert frac > 0.50

    def test_fires_respect_margin(self, verification_catalog):
        catalog, _ = verification_catalog
        for entry in catalog:
            truth = entry.load_truth()
            if not truth.has_fire:
                continue
            rows, cols = np.nonzero(truth.values)
            assert rows.min() >= FIRE_MARGIN_PX and rows.max() < 48 - FIRE_MARGIN_PX
            assert cols.min() >= FIRE_MARGIN_PX and cols.max() < 48 - FIRE_MARGIN_PX

    def test_deterministic_rebuild(self, tmp_path, verification_catalog):
        _, root = verification_catalog
        rebuilt_root = tmp_path / "again"
        build_verification_catalog(rebuilt_root, seed=11)
        for sub in ("metadata.json",):
            assert (rebuilt_root / sub).read_bytes() == (Path(root) / sub).read_bytes()
        a = sorted(p.name for p in (Path(root) / "tiles").iterdir())
        b = sorted(p.name for p in (rebuilt_root / "tiles").iterdir())
        assert a == b
        for name in a[:5]:
            assert (rebuilt_root / "tiles" / name).read_bytes() == (
                Path(root) / "tiles" / name
            ).read_bytes()


class TestFixtureTables:
    def test_truth_fixture_covers_catalog(self, verification_catalog):
        catalog, _ = verification_catalog
        masks = fixture_masks_from_truth(catalog)
        assert set(masks) == {e.meta.tile_id for e in catalog}

    def test_shifted_masks_move_fire_right(self, verification_catalog, tmp_path):
        catalog, _ = verification_catalog
        shifted = shifted_fixture_masks(catalog, tmp_path, shift_px=7)
        fire_entries = [e for e in catalog if e.meta.has_fire]
        assert fire_entries
        for entry in fire_entries:
            truth = entry.load_truth().values
            moved = read_mask(shifted[entry.meta.tile_id]).values
            assert moved.sum() == truth.sum()  # margin keeps the shift in-bounds
            assert np.array_equal(moved[:, 7:], truth[:, :-7])


class TestDevelopmentCatalog:
    def test_covers_every_combination_plus_no_fire(self, tmp_path, small_requirements):
        catalog = build_development_catalog(
            tmp_path, seed=5, requirements=small_requirements, no_fire_per_split=2
        )
        combos = enumerate_in_context_combinations(small_requirements).combinations
        assert len(catalog) == len(combos) + 6
        fire_label_sets = {
            tuple(sorted(e.meta.class_labels.items()))
            for e in catalog
            if e.meta.has_fire
        }
        expected = {tuple(sorted(c.as_dict().items())) for c in combos}
        assert fire_label_sets == expected

    def test_all_three_splits_have_both_fire_values(self, tmp_path, small_requirements):
        catalog = build_development_catalog(
            tmp_path, seed=5, requirements=small_requirements, no_fire_per_split=2
        )
        for split in (Split.DEVELOPMENT, Split.INTERNAL_TEST_1, Split.INTERNAL_TEST_2):
            entries = catalog.in_split(split)
            assert {e.meta.has_fire for e in entries} == {True, False}

    def test_provenance_marks_dev_team(self, tmp_path, small_requirements):
        catalog = build_development_catalog(
            tmp_path, seed=5, requirements=small_requirements, no_fire_per_split=1
        )
        for entry in catalog:
            assert entry.meta.provenance.labeler_team == DEV_TEAM
            assert entry.meta.provenance.collected_by_dev_team is True
