import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from burnbench.core import BurnMask, PaletteStats, RegionStats, Tile
from burnbench.metrics import (
    DegenerateMaskError,
    EmptyRegionError,
    EvaluationError,
    adaptive_threshold,
    burn_iou,
    compute_sample_metrics,
    darkness_contrast,
    delta_c_burn,
    evaluate_sample,
    spectral_plausibility,
    to_grayscale,
)
from burnbench.core import ExperimentSetting

from helpers import make_sample, tile_from_gray


def brute_force_percentile(values, p):
    """Independent oracle: sort a plain list, interpolate at rank p*(N-1)."""
    ordered = sorted(float(v) for v in values)
    rank = p * (len(ordered) - 1)
    lo = math.floor(rank)
    frac = rank - lo
    if lo + 1 >= len(ordered):
        return ordered[-1]
    return ordered[lo] + frac * (ordered[lo + 1] - ordered[lo])


class TestToGrayscale:
    def test_channel_mean(self):
        tile = Tile(np.array([[[30.0, 60.0, 90.0]]]))
        assert to_grayscale(tile).data[0, 0] == 60.0

    def test_black_and_white(self):
        assert to_grayscale(Tile(np.zeros((1, 1, 3)))).data[0, 0] == 0.0
        assert to_grayscale(Tile(np.full((1, 1, 3), 255.0))).data[0, 0] == 255.0


class TestAdaptiveThreshold:
    def test_midpoint_interpolation(self):
        g = to_grayscale(tile_from_gray([[0.0, 100.0]]))
        assert adaptive_threshold(g, 0.5) == 50.0

    def test_constant_field(self):
        g = to_grayscale(tile_from_gray(np.full((3, 3), 7.0)))
        for p in (0.01, 0.25, 0.5, 0.9):
            assert adaptive_threshold(g, p) == 7.0

    def test_hand_interpolation_with_ties(self):
        # 16 values: four 10s, twelve 200s; rank 0.25*15 = 3.75 lands
        # between the last 10 and the first 200
        values = np.array([10.0] * 4 + [200.0] * 12).reshape(4, 4)
        g = to_grayscale(tile_from_gray(values))
        assert adaptive_threshold(g, 0.25) == 152.5

    @pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5])
    def test_rejects_out_of_range_p(self, p):
        g = to_grayscale(tile_from_gray([[1.0, 2.0]]))
        with pytest.raises(ValueError):
            adaptive_threshold(g, p)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=200)
    def test_matches_brute_force_oracle(self, seed):
        rng = np.random.default_rng(seed)
        h, w = rng.integers(1, 65, size=2)
        field = rng.uniform(0, 255, size=(h, w))
        p = rng.uniform(0.01, 0.95)
        g = to_grayscale(tile_from_gray(field))
        assert adaptive_threshold(g, p) == brute_force_percentile(g.data.ravel(), p)


def four_by_four_case(flip=False):
    """4x4 field: 4 burned pixels at gray 10, 12 intact at gray 200.

    With flip=True one burned pixel goes bright and one intact goes dark,
    which by hand gives intersection 3 and union 5.
    """
    mask = np.zeros((4, 4), dtype=int)
    mask[0, :4] = 1
    gray = np.full((4, 4), 200.0)
    gray[0, :4] = 10.0
    if flip:
        gray[0, 0] = 200.0
        gray[1, 0] = 10.0
    return tile_from_gray(gray), BurnMask(mask)


class TestBurnIou:
    def test_perfect_separation_is_exactly_one(self):
        tile, mask = four_by_four_case()
        result = burn_iou(tile, mask)
        assert result.value == 1.0
        assert result.predicted.threshold_used == 152.5
        assert np.array_equal(result.predicted.data, mask.data)

    def test_perturbed_case_exactly_point_six(self):
        tile, mask = four_by_four_case(flip=True)
        result = burn_iou(tile, mask)
        assert result.value == 0.6

    def test_constant_image_gives_burn_ratio(self):
        mask = np.zeros((4, 4), dtype=int)
        mask[:2, :2] = 1
        tile = tile_from_gray(np.full((4, 4), 99.0))
        result = burn_iou(tile, BurnMask(mask))
        assert result.value == 0.25
        assert result.predicted.data.all()

    def test_degenerate_masks_rejected(self):
        tile = tile_from_gray(np.zeros((2, 2)))
        with pytest.raises(DegenerateMaskError, match="degenerate mask"):
            burn_iou(tile, BurnMask(np.zeros((2, 2), dtype=int)))
        with pytest.raises(DegenerateMaskError, match="degenerate mask"):
            burn_iou(tile, BurnMask(np.ones((2, 2), dtype=int)))


class TestDeltaCBurn:
    def test_identical_images_zero(self):
        tile, mask = four_by_four_case()
        assert delta_c_burn(tile, tile, mask) == 0.0

    def test_hand_vector_distance(self):
        # means (10,20,30) vs (13,24,30): sqrt(9+16+0) = 5
        mask = BurnMask(np.ones((1, 2), dtype=int) * np.array([[1, 0]]))
        g = Tile(np.array([[[10.0, 20.0, 30.0], [0, 0, 0]]]))
        r = Tile(np.array([[[13.0, 24.0, 30.0], [0, 0, 0]]]))
        assert delta_c_burn(g, r, mask) == 5.0

    def test_single_pixel_extremes(self):
        mask = BurnMask(np.array([[1, 0]]))
        g = Tile(np.zeros((1, 2, 3)))
        r = Tile(np.full((1, 2, 3), 255.0))
        assert math.isclose(delta_c_burn(g, r, mask), 255.0 * math.sqrt(3),
                            rel_tol=0, abs_tol=1e-9)

    def test_symmetric_in_images(self):
        rng = np.random.default_rng(11)
        g = Tile(rng.uniform(0, 255, size=(5, 5, 3)))
        r = Tile(rng.uniform(0, 255, size=(5, 5, 3)))
        mask = BurnMask(rng.integers(0, 2, size=(5, 5)) | np.eye(5, dtype=int))
        assert delta_c_burn(g, r, mask) == delta_c_burn(r, g, mask)

    def test_empty_region_error(self):
        g = tile_from_gray(np.zeros((2, 2)))
        with pytest.raises(EmptyRegionError):
            delta_c_burn(g, g, BurnMask(np.zeros((2, 2), dtype=int)))


class TestDarknessContrast:
    def test_hand_means(self):
        # burned gray 10; intact 100, 120, 140 -> 120 - 10
        gray = np.array([[10.0, 100.0], [120.0, 140.0]])
        mask = BurnMask(np.array([[1, 0], [0, 0]]))
        assert darkness_contrast(tile_from_gray(gray), mask) == 110.0

    def test_uniform_image_zero(self):
        mask = BurnMask(np.array([[1, 0], [0, 1]]))
        assert darkness_contrast(tile_from_gray(np.full((2, 2), 42.0)), mask) == 0.0

    def test_bright_burn_goes_negative(self):
        gray = np.array([[250.0, 10.0], [10.0, 10.0]])
        mask = BurnMask(np.array([[1, 0], [0, 0]]))
        assert darkness_contrast(tile_from_gray(gray), mask) < 0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=100)
    def test_inversion_negates(self, seed):
        rng = np.random.default_rng(seed)
        data = rng.integers(0, 256, size=(6, 6, 3)).astype(float)
        mask_data = rng.integers(0, 2, size=(6, 6))
        mask_data[0, 0], mask_data[-1, -1] = 1, 0
        mask = BurnMask(mask_data)
        dc = darkness_contrast(Tile(data), mask)
        dc_inv = darkness_contrast(Tile(255.0 - data), mask)
        assert math.isclose(dc_inv, -dc, rel_tol=0, abs_tol=1e-9)

    def test_empty_region_error(self):
        with pytest.raises(EmptyRegionError):
            darkness_contrast(tile_from_gray(np.zeros((2, 2))),
                              BurnMask(np.ones((2, 2), dtype=int)))


def palette_with(mean, std):
    region = RegionStats(mean=np.asarray(mean, float), std=np.asarray(std, float),
                         pixel_count=100)
    return PaletteStats(burned=region, intact=region, source_sample_ids=("p",))


class TestSpectralPlausibility:
    def test_exact_match_is_one(self):
        palette = palette_with([60, 50, 40], [10, 10, 10])
        tile = Tile(np.tile(np.array([60.0, 50.0, 40.0]), (2, 2, 1)))
        mask = BurnMask(np.array([[1, 1], [0, 0]]))
        assert spectral_plausibility(tile, mask, palette) == 1.0

    def test_one_channel_out(self):
        # z = (3.5, 0, 0) -> 2 of 3 channels within 2 sigma
        palette = palette_with([60, 50, 40], [10, 10, 10])
        tile = Tile(np.tile(np.array([95.0, 50.0, 40.0]), (2, 2, 1)))
        mask = BurnMask(np.array([[1, 1], [0, 0]]))
        assert spectral_plausibility(tile, mask, palette) == pytest.approx(2 / 3)

    def test_all_channels_out(self):
        palette = palette_with([60, 50, 40], [10, 10, 10])
        tile = Tile(np.tile(np.array([90.0, 80.0, 70.0]), (2, 2, 1)))
        mask = BurnMask(np.array([[1, 1], [0, 0]]))
        assert spectral_plausibility(tile, mask, palette) == 0.0

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=100)
    def test_epsilon_invariance_with_unit_sigma(self, seed):
        rng = np.random.default_rng(seed)
        mean = rng.uniform(20, 200, size=3)
        sigma = rng.uniform(1.0, 30.0, size=3)
        generated_mean = rng.uniform(0, 255, size=3)
        # stay away from the 2-sigma decision boundary so the indicator
        # cannot flip within the epsilon band
        for c in range(3):
            if abs(abs(generated_mean[c] - mean[c]) - 2 * sigma[c]) < 0.05:
                generated_mean[c] = mean[c]
        palette = palette_with(mean, sigma)
        tile = Tile(np.tile(np.clip(generated_mean, 0, 255), (2, 2, 1)))
        mask = BurnMask(np.array([[1, 1], [0, 0]]))
        values = {
            spectral_plausibility(tile, mask, palette, epsilon=eps)
            for eps in (1e-12, 1e-6, 1e-4, 9e-4)
        }
        assert len(values) == 1


class TestJointPermutationInvariance:
    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=60)
    def test_all_metrics_invariant(self, seed):
        rng = np.random.default_rng(seed)
        h, w = 6, 7
        g = rng.integers(0, 256, size=(h, w, 3)).astype(float)
        r = rng.integers(0, 256, size=(h, w, 3)).astype(float)
        mask = rng.integers(0, 2, size=(h, w))
        mask[0, 0], mask[-1, -1] = 1, 0
        perm = rng.permutation(h * w)

        def shuffle_img(img):
            return img.reshape(-1, 3)[perm].reshape(h, w, 3)

        mask_s = mask.reshape(-1)[perm].reshape(h, w)
        palette = palette_with([45, 38, 32], [8, 7, 6])

        iou_a = burn_iou(Tile(g), BurnMask(mask)).value
        iou_b = burn_iou(Tile(shuffle_img(g)), BurnMask(mask_s)).value
        assert iou_a == iou_b
        assert delta_c_burn(Tile(g), Tile(r), BurnMask(mask)) == pytest.approx(
            delta_c_burn(Tile(shuffle_img(g)), Tile(shuffle_img(r)), BurnMask(mask_s)),
            abs=1e-12,
        )
        assert darkness_contrast(Tile(g), BurnMask(mask)) == pytest.approx(
            darkness_contrast(Tile(shuffle_img(g)), BurnMask(mask_s)), abs=1e-12
        )
        assert spectral_plausibility(Tile(g), BurnMask(mask), palette) == \
            spectral_plausibility(Tile(shuffle_img(g)), BurnMask(mask_s), palette)


class TestEvaluateSample:
    def _sample(self):
        rng = np.random.default_rng(5)
        mask = BurnMask(np.array([[1, 1, 0, 0]] * 4))
        before = Tile(rng.integers(90, 160, size=(4, 4, 3)).astype(float))
        after_data = np.array(before.data)
        after_data[mask.data.astype(bool)] = 40.0
        return make_sample("S03", before, mask, Tile(after_data))

    def test_identity_pair(self, simple_palette):
        sample = self._sample()
        setting = ExperimentSetting.create("E2", "P1")
        record, predicted = evaluate_sample(sample.after, sample, simple_palette, setting)
        assert record.delta_c_burn == 0.0
        assert record.sample_id == "S03"
        assert (record.experiment_id, record.prompt_source) == ("E2", "P1")
        assert predicted.shape == sample.mask.shape

    def test_darkened_mask_stub_has_positive_contrast(self, simple_palette):
        sample = self._sample()
        darkened = np.array(sample.before.data)
        darkened[sample.mask.data.astype(bool)] *= 0.3
        record, _ = evaluate_sample(
            Tile(darkened), sample, simple_palette, ExperimentSetting.create("E2", "P2")
        )
        assert record.darkness_contrast > 0

    def test_missing_after_drops_delta_c(self, simple_palette):
        full = self._sample()
        sample = make_sample("S01", full.before, full.mask, None)
        record, _ = evaluate_sample(full.before, sample, simple_palette,
                                    ExperimentSetting.create("E1", "P1"))
        assert record.delta_c_burn is None

    def test_errors_carry_sample_id(self, simple_palette):
        sample = self._sample()
        wrong_size = tile_from_gray(np.zeros((2, 2)))
        with pytest.raises(EvaluationError, match="S03"):
            compute_sample_metrics(wrong_size, sample, simple_palette)
