from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import random_mask
from firecase.metrics import (
    MaskClass,
    PassCounts,
    SampleVerdict,
    IoUScores,
    VerdictThresholds,
    boundary_offset,
    classify_sample,
    discrete_detections,
    format_pct,
    iou,
    monthly_fp,
    pass_rates,
    pass_summary_json,
    score_masks,
    summarize_verdicts,
    verdicts_to_csv,
)
from firecase.raster import FireMask


def mask(rows: list[list[int]]) -> FireMask:
    return FireMask(np.array(rows, dtype=np.uint8))


class TestIou:
    def test_identical_masks_score_one(self):
        m = mask([[1, 0], [0, 1]])
        assert iou(m, m, MaskClass.FIRE) == 1.0
        assert iou(m, m, MaskClass.NONFIRE) == 1.0

    def test_hand_worked_fire_overlap(self):
        # pred fire {(0,0),(0,1)}, truth fire {(0,1),(0,2)}: 1 shared, 3 total.
        pred = mask([[1, 1, 0], [0, 0, 0], [0, 0, 0]])
        truth = mask([[0, 1, 1], [0, 0, 0], [0, 0, 0]])
        assert iou(pred, truth, MaskClass.FIRE) == pytest.approx(1 / 3)

    def test_empty_empty_rule(self):
        empty = mask([[0, 0], [0, 0]])
        assert iou(empty, empty, MaskClass.FIRE) == 1.0
        full = mask([[1, 1], [1, 1]])
        assert iou(full, full, MaskClass.NONFIRE) == 1.0

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ValueError, match="dimensions differ"):
            iou(mask([[0]]), mask([[0, 0]]))

    def test_accepts_string_class(self):
        m = mask([[1]])
        assert iou(m, m, "fire") == 1.0

    def test_matches_set_oracle_on_random_masks(self, rng):
        for _ in range(300):
            h, w = int(rng.integers(1, 17)), int(rng.integers(1, 17))
            pred, truth = random_mask(rng, h, w), random_mask(rng, h, w)
            assert iou(pred, truth, MaskClass.FIRE) == pytest.approx(
                oracles.iou_sets(pred.values, truth.values, 1)
            )
            assert iou(pred, truth, MaskClass.NONFIRE) == pytest.approx(
                oracles.iou_sets(pred.values, truth.values, 0)
            )

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=30, deadline=None)
    def test_symmetric_and_bounded(self, seed):
        r = np.random.default_rng(seed)
        pred, truth = random_mask(r, 8, 8), random_mask(r, 8, 8)
        for cls in MaskClass:
            forward = iou(pred, truth, cls)
            assert iou(truth, pred, cls) == forward
            assert 0.0 <= forward <= 1.0


class TestScores:
    def test_mean_is_average(self, rng):
        for _ in range(50):
            pred, truth = random_mask(rng, 6, 6), random_mask(rng, 6, 6)
            s = score_masks(pred, truth)
            assert s.mean_iou == pytest.approx((s.fire_iou + s.nonfire_iou) / 2)


class TestBoundaryOffset:
    def test_subset_prediction_scores_zero(self):
        truth = mask([[1, 1, 1], [1, 1, 1], [0, 0, 0]])
        pred = mask([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
        assert boundary_offset(pred, truth) == 0.0

    def test_three_four_five_triangle(self):
        pred = np.zeros((6, 6), dtype=np.uint8)
        truth = np.zeros((6, 6), dtype=np.uint8)
        pred[0, 0] = 1
        truth[3, 4] = 1
        assert boundary_offset(FireMask(pred), FireMask(truth)) == pytest.approx(5.0)

    def test_seven_pixel_shift_breaches_mlsr1(self):
        pred = np.zeros((10, 10), dtype=np.uint8)
        truth = np.zeros((10, 10), dtype=np.uint8)
        truth[5, 1] = 1
        pred[5, 8] = 1
        offset = boundary_offset(FireMask(pred), FireMask(truth))
        assert offset == pytest.approx(7.0)
        assert offset >= 6.0

    def test_empty_truth_rejected(self):
        with pytest.raises(ValueError, match="no fire"):
            boundary_offset(mask([[1]]), mask([[0]]))

    def test_matches_pairwise_oracle(self, rng):
        for _ in range(200):
            h, w = int(rng.integers(1, 13)), int(rng.integers(1, 13))
            truth = random_mask(rng, h, w, p=0.4)
            if not truth.has_fire:
                continue
            pred = random_mask(rng, h, w, p=0.4)
            assert boundary_offset(pred, truth) == pytest.approx(
                oracles.boundary_offset_pairwise(pred.values, truth.values)
            )


class TestClassify:
    def test_perfect_prediction_clean(self):
        truth = mask([[1, 1], [0, 0]])
        v = classify_sample(truth, truth, tile_id="t")
        assert not v.is_false_negative and not v.is_false_positive
        assert v.boundary_offset_px == 0.0

    def test_all_clear_prediction_on_fire_is_fn(self):
        truth = mask([[1, 1], [0, 0]])
        pred = mask([[0, 0], [0, 0]])
        v = classify_sample(pred, truth)
        assert v.is_false_negative
        assert v.boundary_offset_px is None

    def test_fire_hallucination_is_fp(self):
        truth = FireMask(np.zeros((20, 20), dtype=np.uint8))
        pred_values = np.zeros((20, 20), dtype=np.uint8)
        pred_values[:3, :3] = 1  # 9 of 400 wrong: non-fire IoU 391/400 < 0.99
        v = classify_sample(FireMask(pred_values), truth)
        assert v.is_false_positive
        # the threshold rules are independent: hallucinated fire also drives
        # fire IoU to 0/9 = 0 < 0.3, so the FN flag fires too
        assert v.is_false_negative
        assert v.boundary_offset_px is None  # truth has no fire to measure against

    def test_thresholds_are_configuration(self):
        truth = mask([[1, 1, 1, 1], [0, 0, 0, 0]])
        pred = mask([[1, 1, 0, 0], [0, 0, 0, 0]])
        # fire IoU = 2/4 = 0.5: FN under a 0.6 threshold, not under 0.3.
        assert not classify_sample(pred, truth).is_false_negative
        strict = VerdictThresholds(fn_fire_iou=0.6)
        assert classify_sample(pred, truth, strict).is_false_negative

    def test_flags_match_direct_inequalities(self, rng):
        for _ in range(100):
            pred, truth = random_mask(rng, 10, 10), random_mask(rng, 10, 10)
            v = classify_sample(pred, truth)
            assert v.is_false_negative == (v.scores.fire_iou < 0.3)
            assert v.is_false_positive == (v.scores.nonfire_iou < 0.99)


class TestDiscreteDetections:
    def test_empty_mask_has_none(self):
        assert discrete_detections(mask([[0, 0], [0, 0]])).count == 0

    def test_diagonal_pixels_are_one_component(self):
        assert discrete_detections(mask([[1, 0], [0, 1]])).count == 1

    def test_separated_blocks_count_separately(self):
        m = np.zeros((10, 10), dtype=np.uint8)
        m[0:2, 0:2] = 1
        m[6:8, 6:8] = 1
        result = discrete_detections(FireMask(m))
        assert result.count == 2
        assert sorted(c.size for c in result.components) == [4, 4]

    def test_matches_flood_fill_oracle(self, rng):
        for _ in range(200):
            m = random_mask(rng, 20, 20, p=0.25)
            expected = oracles.flood_fill_components(m.values)
            result = discrete_detections(m)
            assert result.count == len(expected)
            assert sorted(sorted(c.pixels) for c in result.components) == sorted(
                sorted(c) for c in expected
            )

    def test_centroids_are_pixel_means(self):
        m = np.zeros((5, 5), dtype=np.uint8)
        m[1, 1] = m[1, 2] = m[2, 1] = m[2, 2] = 1
        component = discrete_detections(FireMask(m)).components[0]
        assert component.centroid == (1.5, 1.5)


class TestPassRates:
    def test_moderate_row_arithmetic(self):
        rates = pass_rates(PassCounts(921, 4, 27))
        assert rates.fn_pct == pytest.approx(100 * 4 / 925)
        assert rates.fp_pct == pytest.approx(100 * 27 / 948)
        assert rates.display() == ("0.43", "2.85")

    def test_critical_row_arithmetic(self):
        rates = pass_rates(PassCounts(921, 7, 96))
        assert rates.fn_pct == pytest.approx(100 * 7 / 928)
        assert rates.fp_pct == pytest.approx(100 * 96 / 1017)

    def test_clean_pass_is_zero(self):
        rates = pass_rates(PassCounts(921, 0, 0))
        assert rates.fn_pct == 0.0 and rates.fp_pct == 0.0

    def test_detections_fp_form(self):
        rates = pass_rates(PassCounts(921, 4, 27), fp_form="detections")
        assert rates.fp_pct == pytest.approx(100 * 27 / 921)
        assert rates.display()[1] == "2.93"

    def test_zero_denominator_rejected(self):
        with pytest.raises(ValueError, match="fn rate undefined"):
            pass_rates(PassCounts(0, 0, 5))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError, match=">= 0"):
            PassCounts(-1, 0, 0)


class TestRounding:
    def test_half_up_not_bankers(self):
        assert format_pct(0.125, 2) == "0.13"
        assert format_pct(2.845, 2) == "2.85"

    def test_plain_cases(self):
        assert format_pct(0.0) == "0.00"
        assert format_pct(9.444) == "9.44"


class TestMonthlyFp:
    def test_zero_probability_compliant(self):
        assert monthly_fp(0.0, 100000).compliant

    def test_boundary_exactly_at_budget_compliant(self):
        estimate = monthly_fp(0.001, 52000)
        assert estimate.expected_fp_per_month == pytest.approx(52.0)
        assert estimate.compliant

    def test_double_budget_violates(self):
        estimate = monthly_fp(0.002, 52000)
        assert estimate.expected_fp_per_month == pytest.approx(104.0)
        assert not estimate.compliant

    def test_probability_range_checked(self):
        with pytest.raises(ValueError, match="probability"):
            monthly_fp(1.5, 10)


class TestSummary:
    def test_exact_fixture_rates(self):
        clean = IoUScores(fire_iou=1.0, nonfire_iou=1.0)
        missed = IoUScores(fire_iou=0.0, nonfire_iou=1.0)
        verdicts = [
            SampleVerdict(f"t{i}", clean, False, False, 0.0) for i in range(992)
        ] + [SampleVerdict(f"m{i}", missed, True, False, None) for i in range(8)]
        summary = summarize_verdicts(verdicts)
        assert summary.total == 1000
        assert summary.fn_count == 8 and summary.fp_count == 0
        assert summary.fn_rate_pct == 0.8  # exact: 800/1000
        assert summary.fp_rate_pct == 0.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="zero verdicts"):
            summarize_verdicts([])


class TestSerialization:
    def test_csv_columns_and_rows(self):
        v = SampleVerdict("tile-1", IoUScores(0.5, 1.0), False, False, 1.5)
        text = verdicts_to_csv([v])
        lines = text.strip().split("\n")
        assert lines[0] == "tile_id,fire_iou,nonfire_iou,mean_iou,fn,fp,boundary_offset_px"
        assert lines[1] == "tile-1,0.5,1.0,0.75,0,0,1.5"

    def test_none_offset_is_empty_cell(self):
        v = SampleVerdict("t", IoUScores(0.0, 1.0), True, False, None)
        assert verdicts_to_csv([v]).strip().split("\n")[1].endswith(",")

    def test_pass_summary_json_round_trips(self):
        import json

        counts = PassCounts(921, 4, 27)
        payload = json.loads(pass_summary_json(counts, pass_rates(counts)))
        assert payload["counts"]["detections"] == 921
        assert payload["rates"]["fn_pct_display"] == "0.43"
        assert math.isclose(payload["rates"]["fp_pct"], 100 * 27 / 948)
