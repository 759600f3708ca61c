import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hsictest import (
    DegenerateDataError,
    InputError,
    KernelSpec,
    brownian_kernel,
    center_gram,
    cross_gram,
    gaussian_kernel,
    gram,
    kernel_eval,
    linear_kernel,
    median_heuristic,
    polynomial_kernel,
    strip_diagonal,
)

from oracles import center_oracle, cross_gram_oracle, gram_oracle, median_heuristic_oracle

ALL_SPECS = [
    gaussian_kernel(1.3),
    linear_kernel(),
    polynomial_kernel(3),
    brownian_kernel(0.5),
    brownian_kernel(0.8),
]


class TestKernelEval:
    def test_gaussian_zero_distance(self):
        x = np.array([0.4, -1.2])
        assert kernel_eval(gaussian_kernel(1.0), x, x) == pytest.approx(1.0)

    def test_gaussian_known_value(self):
        k = kernel_eval(gaussian_kernel(1.0), [0.0], [2.0])
        assert k == pytest.approx(np.exp(-2.0), abs=1e-15)

    def test_brownian_collapsed_distance(self):
        assert kernel_eval(brownian_kernel(0.5), [1.0], [1.0]) == pytest.approx(1.0)

    def test_linear_dot_product(self):
        assert kernel_eval(linear_kernel(), [1.0, 2.0], [3.0, 4.0]) == pytest.approx(11.0)

    def test_polynomial(self):
        k = kernel_eval(polynomial_kernel(2), [1.0, 1.0], [1.0, 0.0])
        assert k == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        with pytest.raises(InputError):
            kernel_eval(linear_kernel(), [1.0], [1.0, 2.0])

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
    def test_symmetry(self, spec, rng):
        for _ in range(20):
            x = rng.standard_normal(3)
            y = rng.standard_normal(3)
            assert kernel_eval(spec, x, y) == pytest.approx(
                kernel_eval(spec, y, x), rel=1e-12, abs=1e-12
            )


class TestSpecValidation:
    def test_bad_sigma(self):
        with pytest.raises(InputError):
            KernelSpec("gaussian", sigma=0.0)

    def test_bad_degree(self):
        with pytest.raises(InputError):
            KernelSpec("polynomial", degree=0)

    def test_bad_hurst(self):
        with pytest.raises(InputError):
            KernelSpec("brownian", hurst=1.0)

    def test_unknown_family(self):
        with pytest.raises(InputError):
            KernelSpec("laplacian")


class TestGram:
    def test_single_point(self):
        K = gram(gaussian_kernel(2.0), np.array([[1.0, 2.0]]))
        assert K.entries.shape == (1, 1)
        assert K.entries[0, 0] == pytest.approx(1.0)

    def test_gaussian_two_points(self):
        K = gram(gaussian_kernel(1.0), np.array([[0.0], [2.0]]))
        expected = np.array([[1.0, np.exp(-2.0)], [np.exp(-2.0), 1.0]])
        np.testing.assert_allclose(K.entries, expected, atol=1e-15)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
    def test_matches_scalar_loop(self, spec, rng):
        X = rng.standard_normal((5, 3))
        np.testing.assert_allclose(gram(spec, X).entries, gram_oracle(spec, X), atol=1e-12)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
    def test_symmetric_exactly(self, spec, rng):
        X = rng.standard_normal((8, 2))
        K = gram(spec, X).entries
        np.testing.assert_array_equal(K, K.T)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
    def test_psd_sampled(self, spec, rng):
        for _ in range(50):
            X = rng.standard_normal((10, 2))
            vals = np.linalg.eigvalsh(gram(spec, X).entries)
            assert vals.min() >= -1e-8 * max(vals.max(), 1e-30)


class TestCrossGram:
    def test_equals_gram_on_same_input(self, rng):
        X = rng.standard_normal((4, 2))
        spec = gaussian_kernel(0.7)
        np.testing.assert_allclose(
            cross_gram(spec, X, X), gram(spec, X).entries, atol=1e-12
        )

    def test_single_pair(self):
        out = cross_gram(linear_kernel(), np.array([[1.0, 2.0]]), np.array([[3.0, 1.0]]))
        assert out.shape == (1, 1)
        assert out[0, 0] == pytest.approx(5.0)

    @pytest.mark.parametrize("spec", ALL_SPECS, ids=lambda s: s.describe())
    def test_matches_elementwise_oracle(self, spec, rng):
        A = rng.standard_normal((4, 3))
        B = rng.standard_normal((2, 3))
        np.testing.assert_allclose(
            cross_gram(spec, A, B), cross_gram_oracle(spec, A, B), atol=1e-12
        )

    def test_dimension_mismatch(self, rng):
        with pytest.raises(InputError):
            cross_gram(linear_kernel(), rng.standard_normal((3, 2)), rng.standard_normal((3, 3)))


class TestCentering:
    def test_constant_matrix_to_zero(self):
        from hsictest.kernels import GramMatrix

        K = GramMatrix(np.full((4, 4), 3.7))
        np.testing.assert_allclose(center_gram(K).entries, 0.0, atol=1e-12)

    def test_identity_two_by_two(self):
        from hsictest.kernels import GramMatrix

        C = center_gram(GramMatrix(np.eye(2))).entries
        np.testing.assert_allclose(C, np.array([[0.5, -0.5], [-0.5, 0.5]]), atol=1e-15)

    def test_matches_triple_product_oracle(self, rng):
        from hsictest.kernels import GramMatrix

        A = rng.standard_normal((6, 6))
        K = GramMatrix(A + A.T)
        np.testing.assert_allclose(
            center_gram(K).entries, center_oracle(K.entries), atol=1e-12
        )

    def test_idempotent(self, rng):
        K = gram(gaussian_kernel(1.0), rng.standard_normal((7, 2)))
        once = center_gram(K)
        twice = center_gram(once)
        denom = np.linalg.norm(once.entries)
        assert np.linalg.norm(twice.entries - once.entries) <= 1e-10 * denom

    def test_row_sums_vanish(self, rng):
        K = gram(brownian_kernel(), rng.standard_normal((9, 3)))
        C = center_gram(K)
        bound = 1e-8 * K.m * np.abs(C.entries).max()
        assert np.abs(C.entries.sum(axis=1)).max() <= bound

    def test_flags(self, rng):
        K = gram(linear_kernel(), rng.standard_normal((5, 2)))
        assert not K.centered and not K.diag_zeroed
        C = center_gram(K)
        assert C.centered and not C.diag_zeroed
        T = strip_diagonal(K)
        assert T.diag_zeroed and not T.centered
        np.testing.assert_array_equal(np.diag(T.entries), 0.0)
        with pytest.raises(InputError):
            strip_diagonal(C)


class TestMedianHeuristic:
    def test_single_pair(self):
        assert median_heuristic(np.array([[0.0], [2.0]])) == pytest.approx(2.0)

    def test_three_points(self):
        # pairwise distances {1, 2, 3}, median 2
        assert median_heuristic(np.array([[0.0], [1.0], [3.0]])) == pytest.approx(2.0)

    def test_matches_exhaustive_oracle(self, rng):
        X = rng.standard_normal((1000, 2))
        got = median_heuristic(X, max_points=1000, rng=rng)
        assert got == pytest.approx(median_heuristic_oracle(X), rel=1e-12)

    def test_subsampling_deterministic(self, rng):
        X = np.random.default_rng(7).standard_normal((200, 2))
        a = median_heuristic(X, max_points=50, rng=np.random.default_rng(3))
        b = median_heuristic(X, max_points=50, rng=np.random.default_rng(3))
        assert a == b

    def test_identical_rows_error(self):
        with pytest.raises(DegenerateDataError):
            median_heuristic(np.ones((10, 2)))

    @given(scale=st.floats(min_value=1e-3, max_value=1e3))
    @settings(max_examples=25, deadline=None)
    def test_scale_equivariance(self, scale):
        X = np.random.default_rng(11).standard_normal((30, 2))
        base = median_heuristic(X, max_points=30)
        scaled = median_heuristic(scale * X, max_points=30)
        assert scaled == pytest.approx(scale * base, rel=1e-12)

    def test_squared_variant(self, rng):
        X = rng.standard_normal((40, 2))
        from scipy.spatial.distance import pdist

        expected = float(np.sqrt(np.median(pdist(X) ** 2)))
        assert median_heuristic(X, max_points=40, squared=True) == pytest.approx(expected)
