import numpy as np
import pytest

from ldrnet import (
    DimensionError,
    DomainError,
    Padding,
    add,
    check_kernel,
    check_tensor,
    correlate2d,
    gaussian_kernel,
    hypot_eps,
    subtract,
    zip_map,
)
from ldrnet.lga import SOBEL_X, SOBEL_Y

from oracles import correlate2d_reference

ALL_PADDINGS = [
    (Padding.REFLECT, "reflect"),
    (Padding.ZERO, "zero"),
    (Padding.REPLICATE, "replicate"),
]


class TestCheckHelpers:
    def test_check_tensor_casts_to_float32(self):
        out = check_tensor(np.ones((2, 3, 4), dtype=np.float64))
        assert out.dtype == np.float32

    def test_check_tensor_rejects_wrong_rank(self):
        with pytest.raises(DimensionError):
            check_tensor(np.ones((3, 4)))

    def test_check_tensor_rejects_nan(self):
        bad = np.ones((1, 2, 2), dtype=np.float32)
        bad[0, 0, 0] = np.nan
        with pytest.raises(DomainError):
            check_tensor(bad)

    def test_check_kernel_rejects_even_side(self):
        with pytest.raises(DimensionError):
            check_kernel(np.ones((2, 3), dtype=np.float32))


class TestCorrelate2d:
    def test_identity_kernel(self):
        rng = np.random.default_rng(0)
        x = rng.random((1, 5, 5)).astype(np.float32)
        out = correlate2d(x, np.array([[1.0]]), Padding.REFLECT)
        np.testing.assert_array_equal(out, x)

    def test_normalized_kernel_on_constant_field(self):
        x = np.full((1, 5, 5), 0.37, dtype=np.float32)
        out = correlate2d(x, gaussian_kernel(1.0, radius=1), Padding.REFLECT)
        np.testing.assert_allclose(out, 0.37, atol=1e-6)

    def test_matches_bruteforce_oracle_sobel_zero_padding(self):
        rng = np.random.default_rng(7)
        x = rng.random((1, 8, 8)).astype(np.float32)
        out = correlate2d(x, SOBEL_X, Padding.ZERO)
        expected = correlate2d_reference(x, SOBEL_X, "zero")
        np.testing.assert_allclose(out, expected, atol=1e-6)

    @pytest.mark.parametrize("padding,mode", ALL_PADDINGS)
    def test_matches_bruteforce_oracle_all_paddings(self, padding, mode):
        rng = np.random.default_rng(11)
        kernels = [SOBEL_X, SOBEL_Y, gaussian_kernel(1.0)]
        for trial in range(5):
            x = rng.random((2, 8, 8)).astype(np.float32)
            for kernel in kernels:
                out = correlate2d(x, kernel, padding)
                expected = correlate2d_reference(x, kernel, mode)
                np.testing.assert_allclose(out, expected, atol=1e-6)

    def test_center_delta_kernel_is_identity_everywhere(self):
        rng = np.random.default_rng(3)
        x = rng.random((1, 6, 6)).astype(np.float32)
        delta = np.zeros((3, 3), dtype=np.float32)
        delta[1, 1] = 1.0
        for padding, _ in ALL_PADDINGS:
            np.testing.assert_array_equal(correlate2d(x, delta, padding), x)

    @pytest.mark.parametrize("padding,mode", ALL_PADDINGS)
    def test_offcenter_delta_respects_padding_rule(self, padding, mode):
        """A shifted one-hot kernel reads the padded image at the borders."""
        rng = np.random.default_rng(4)
        x = rng.random((1, 6, 6)).astype(np.float32)
        delta = np.zeros((3, 3), dtype=np.float32)
        delta[0, 2] = 1.0
        out = correlate2d(x, delta, padding)
        np.testing.assert_allclose(out, correlate2d_reference(x, delta, mode), atol=1e-7)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        a = rng.random((1, 10, 10)).astype(np.float32)
        b = rng.random((1, 10, 10)).astype(np.float32)
        kernel = gaussian_kernel(1.0)
        alpha, beta = 1.7, -0.6
        lhs = correlate2d((alpha * a + beta * b).astype(np.float32), kernel)
        rhs = alpha * correlate2d(a, kernel) + beta * correlate2d(b, kernel)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-4, atol=1e-6)

    def test_kernel_larger_than_image_rejected(self):
        with pytest.raises(DimensionError):
            correlate2d(np.ones((1, 3, 3), dtype=np.float32), gaussian_kernel(1.0))

    def test_even_kernel_rejected(self):
        with pytest.raises(DimensionError):
            correlate2d(np.ones((1, 5, 5), dtype=np.float32), np.ones((2, 2)))


class TestGaussianKernel:
    def test_sigma_one_shape_and_sum(self):
        k = gaussian_kernel(1.0)
        assert k.shape == (7, 7)
        assert abs(float(k.sum()) - 1.0) <= 1e-6

    def test_sigma_half_shape(self):
        assert gaussian_kernel(0.5).shape == (5, 5)

    def test_radius_override_center_weight(self):
        """3x3 restriction of sigma=1: center weight from direct evaluation."""
        k = gaussian_kernel(1.0, radius=1)
        expected = np.exp(0.0) / (1.0 + 4.0 * np.exp(-0.5) + 4.0 * np.exp(-1.0))
        assert k.shape == (3, 3)
        assert abs(float(k[1, 1]) - expected) <= 1e-6
        assert round(expected, 4) == 0.2042

    @pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0, 3.7])
    def test_symmetry_and_normalization(self, sigma):
        k = gaussian_kernel(sigma)
        assert np.array_equal(k, k.T)
        assert np.array_equal(k, k[::-1, :])
        assert np.array_equal(k, k[:, ::-1])
        assert abs(float(k.sum()) - 1.0) <= 1e-6

    @pytest.mark.parametrize("sigma", [0.0, -1.0])
    def test_nonpositive_sigma_rejected(self, sigma):
        with pytest.raises(DomainError):
            gaussian_kernel(sigma)


class TestElementwise:
    def test_sub_self_is_zero(self):
        rng = np.random.default_rng(9)
        x = rng.random((2, 4, 4)).astype(np.float32)
        np.testing.assert_array_equal(subtract(x, x), np.zeros_like(x))

    def test_hypot_pythagorean_triple(self):
        a = np.full((1, 1, 1), 3.0, dtype=np.float32)
        b = np.full((1, 1, 1), 4.0, dtype=np.float32)
        assert float(hypot_eps(a, b, 0.0)[0, 0, 0]) == 5.0

    def test_hypot_epsilon_floor(self):
        z = np.zeros((1, 2, 2), dtype=np.float32)
        np.testing.assert_allclose(hypot_eps(z, z, 1e-6), 1e-3, rtol=1e-6)

    def test_add_matches_numpy(self):
        rng = np.random.default_rng(10)
        a = rng.random((1, 3, 3)).astype(np.float32)
        b = rng.random((1, 3, 3)).astype(np.float32)
        np.testing.assert_array_equal(add(a, b), a + b)

    def test_shape_mismatch_rejected(self):
        with pytest.raises(DimensionError):
            subtract(np.ones((1, 2, 2), np.float32), np.ones((1, 3, 3), np.float32))

    def test_zip_map_dispatch(self):
        a = np.full((1, 1, 1), 3.0, dtype=np.float32)
        b = np.full((1, 1, 1), 4.0, dtype=np.float32)
        np.testing.assert_array_equal(zip_map(a, b, "add"), a + b)
        np.testing.assert_array_equal(zip_map(a, b, "sub"), a - b)
        assert float(zip_map(a, b, "hypot_eps", epsilon=0.0)[0, 0, 0]) == 5.0
        with pytest.raises(DomainError):
            zip_map(a, b, "hypot_eps")
        with pytest.raises(DomainError):
            zip_map(a, b, "mul")
