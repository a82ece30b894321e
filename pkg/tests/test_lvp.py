import numpy as np
import pytest

from ldrnet import (
    DimensionError,
    DomainError,
    LvpWeights,
    UnsupportedConfigurationError,
    code_histogram,
    encode_patch,
    extract_lvp,
    gaussian_blur,
    pattern_entropy,
    with_weights,
)

from oracles import lvp_reference


def grid_image(rng, shape):
    """Random image on the 8-bit decode grid, like a decoded PNG."""
    return (rng.integers(0, 256, size=shape).astype(np.float32)) / 255.0


class TestEncodePatch:
    def test_all_equal_encodes_zero(self):
        assert encode_patch(np.full((3, 3), 0.4)) == 0

    def test_dominant_center_encodes_all_ones(self):
        patch = np.zeros((3, 3))
        patch[1, 1] = 1.0
        assert encode_patch(patch) == 0b11111111

    def test_alternating_ring_hand_case(self):
        """Center 0.5, ring alternating 0/1 starting NW=0: bits 1,0,1,0,1,0,1,0."""
        patch = np.array(
            [
                [0.0, 1.0, 0.0],
                [1.0, 0.5, 1.0],
                [0.0, 1.0, 0.0],
            ]
        )
        # Ring in NW,N,NE,E,SE,S,SW,W order reads 0,1,0,1,0,1,0,1.
        assert encode_patch(patch) == 0b01010101

    def test_ties_encode_zero_bits(self):
        patch = np.full((3, 3), 1.0)
        patch[0, 0] = 0.5  # only the NW bit can be set
        assert encode_patch(patch) == 0b00000001

    def test_wrong_shape_rejected(self):
        with pytest.raises(DimensionError):
            encode_patch(np.zeros((2, 3)))


class TestLvpWeights:
    def test_default_is_powers_of_two(self):
        w = LvpWeights.default()
        np.testing.assert_array_equal(w.values, [1, 2, 4, 8, 16, 32, 64, 128])
        assert w.is_default
        assert w.scale == 255.0

    def test_duplicate_weights_rejected(self):
        with pytest.raises(DomainError):
            LvpWeights([1, 1, 2, 3, 4, 5, 6, 7])

    def test_colliding_subset_sums_rejected(self):
        # 1 + 2 = 3 makes patterns {0,1} and {2} indistinguishable
        with pytest.raises(DomainError):
            LvpWeights([1, 2, 3, 100, 200, 400, 800, 1600])

    def test_random_weights_are_valid_and_deterministic(self):
        a = LvpWeights.random(123)
        b = LvpWeights.random(123)
        np.testing.assert_array_equal(a.values, b.values)
        assert not a.is_default
        sums = a.aggregate(np.arange(256, dtype=np.uint8))
        assert len(set(sums.tolist())) == 256

    def test_decode_round_trips_all_patterns(self):
        for weights in (LvpWeights.default(), LvpWeights.random(5)):
            codes = np.arange(256, dtype=np.uint8)
            values = weights.aggregate(codes)
            decoded = [weights.decode(v) for v in values]
            assert decoded == list(range(256))

    def test_decode_rejects_unreachable_value(self):
        with pytest.raises(DomainError):
            LvpWeights.default().decode(0.5)


class TestExtractLvp:
    def test_constant_image_all_zero(self):
        x = np.full((2, 5, 5), 0.5, dtype=np.float32)
        feature = extract_lvp(x)
        np.testing.assert_array_equal(feature.map, np.zeros_like(x))
        np.testing.assert_array_equal(feature.patterns, np.zeros(x.shape, np.uint8))

    def test_single_maximal_pixel_hits_255(self):
        x = np.zeros((1, 7, 7), dtype=np.float32)
        x[0, 3, 3] = 1.0
        feature = extract_lvp(x)
        assert float(feature.map[0, 3, 3]) == 255.0
        assert int(feature.patterns[0, 3, 3]) == 255

    def test_matches_scalar_oracle_on_seeded_image(self):
        rng = np.random.default_rng(31)
        x = grid_image(rng, (1, 4, 4))
        feature = extract_lvp(x)
        expected_map, expected_codes = lvp_reference(x, LvpWeights.default().values)
        np.testing.assert_array_equal(feature.patterns, expected_codes)
        np.testing.assert_array_equal(feature.map, expected_map)

    def test_matches_scalar_oracle_with_random_weights(self):
        rng = np.random.default_rng(32)
        x = grid_image(rng, (2, 5, 6))
        weights = LvpWeights.random(9)
        feature = extract_lvp(x, weights)
        expected_map, expected_codes = lvp_reference(x, weights.values)
        np.testing.assert_array_equal(feature.patterns, expected_codes)
        np.testing.assert_array_equal(feature.map, expected_map)

    def test_map_is_weighted_sum_of_patterns_exactly(self):
        rng = np.random.default_rng(33)
        x = grid_image(rng, (1, 8, 8))
        weights = LvpWeights.random(2)
        feature = extract_lvp(x, weights)
        recomputed = weights.aggregate(feature.patterns)
        np.testing.assert_array_equal(feature.map, recomputed)

    def test_small_image_rejected(self):
        with pytest.raises(DimensionError):
            extract_lvp(np.ones((1, 2, 4), dtype=np.float32))


class TestHistogramAndEntropy:
    def test_constant_image_concentrates_bin_zero(self):
        x = np.full((1, 6, 6), 0.3, dtype=np.float32)
        hist = code_histogram(extract_lvp(x))
        assert hist[0] == 36
        assert hist.sum() == 36

    def test_single_max_pixel_counts_bin_255(self):
        x = np.zeros((1, 9, 9), dtype=np.float32)
        x[0, 4, 4] = 1.0
        hist = code_histogram(extract_lvp(x))
        assert hist[255] == 1

    def test_histogram_matches_recount(self):
        rng = np.random.default_rng(34)
        x = grid_image(rng, (3, 10, 10))
        feature = extract_lvp(x)
        hist = code_histogram(feature)
        assert hist.sum() == x.size
        for code in range(256):
            assert hist[code] == int((feature.patterns == code).sum())

    def test_non_default_weights_unsupported(self):
        rng = np.random.default_rng(35)
        feature = extract_lvp(grid_image(rng, (1, 5, 5)), LvpWeights.random(1))
        with pytest.raises(UnsupportedConfigurationError):
            code_histogram(feature)

    def test_with_weights_reaggregates_patterns(self):
        rng = np.random.default_rng(36)
        feature = extract_lvp(grid_image(rng, (1, 5, 5)), LvpWeights.random(1))
        swapped = with_weights(feature, LvpWeights.default())
        assert swapped.weights.is_default
        np.testing.assert_array_equal(swapped.patterns, feature.patterns)
        hist = code_histogram(swapped)
        assert hist.sum() == 25

    def test_entropy_single_bin_is_zero(self):
        hist = np.zeros(256, dtype=np.int64)
        hist[17] = 1000
        assert pattern_entropy(hist) == 0.0

    def test_entropy_uniform_is_eight_bits(self):
        assert pattern_entropy(np.full(256, 5, dtype=np.int64)) == 8.0

    def test_entropy_two_equal_bins_is_one_bit(self):
        hist = np.zeros(256, dtype=np.int64)
        hist[3] = 50
        hist[200] = 50
        assert pattern_entropy(hist) == 1.0

    def test_entropy_empty_histogram_rejected(self):
        with pytest.raises(DomainError):
            pattern_entropy(np.zeros(256, dtype=np.int64))


class TestInvariances:
    def test_bijectivity_round_trip(self):
        """Every map value decodes back to the pattern that produced it."""
        rng = np.random.default_rng(37)
        x = grid_image(rng, (1, 16, 16))
        feature = extract_lvp(x)
        for value, code in zip(feature.map.reshape(-1), feature.patterns.reshape(-1)):
            assert feature.weights.decode(value) == int(code)

    def test_constant_shift_leaves_patterns_unchanged(self):
        rng = np.random.default_rng(38)
        for seed in range(20):
            x = grid_image(np.random.default_rng(seed), (3, 16, 16))
            shift = np.float32(rng.choice([0.125, 1.0, -0.25]))
            shifted = x + shift
            np.testing.assert_array_equal(
                extract_lvp(shifted).patterns, extract_lvp(x).patterns
            )

    def test_positive_scale_leaves_patterns_unchanged(self):
        rng = np.random.default_rng(39)
        for seed in range(20):
            x = grid_image(np.random.default_rng(seed), (3, 16, 16))
            factor = np.float32(rng.choice([0.5, 2.0, 3.7]))
            scaled = x * factor
            np.testing.assert_array_equal(
                extract_lvp(scaled).patterns, extract_lvp(x).patterns
            )

    def test_blur_lowers_pattern_entropy(self):
        """Smoothing collapses pattern diversity on white noise."""
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            x = rng.random((1, 24, 24)).astype(np.float32)
            blurred = np.clip(gaussian_blur(x, 7), 0.0, 1.0)
            e_orig = pattern_entropy(code_histogram(extract_lvp(x)))
            e_blur = pattern_entropy(code_histogram(extract_lvp(blurred)))
            wins += e_blur < e_orig
        assert wins >= 95
