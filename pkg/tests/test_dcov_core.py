import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from divdcov import (
    DataError,
    DataMatrix,
    DCovConfig,
    augment_union,
    distance_matrix,
    double_center,
    fast_dcov2_univariate,
    sample_dcor2,
    sample_dcov2,
    standardize,
)
from divdcov.dcov_core import dcov2


def explicit_dcov2(x, y, exponent=1.0):
    """Oracle: distances by double loop, centering by explicit J D J products."""
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    y = np.asarray(y, dtype=float).reshape(len(y), -1)
    n = x.shape[0]
    ex = np.zeros((n, n))
    ey = np.zeros((n, n))
    for k in range(n):
        for l in range(n):
            ex[k, l] = np.sqrt(np.sum((x[k] - x[l]) ** 2)) ** exponent
            ey[k, l] = np.sqrt(np.sum((y[k] - y[l]) ** 2)) ** exponent
    j = np.eye(n) - np.ones((n, n)) / n
    return float(np.sum((j @ ex @ j) * (j @ ey @ j))) / n**2


finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)


class TestDistanceMatrix:
    def test_two_points_squared(self):
        np.testing.assert_array_equal(distance_matrix([[0.0], [1.0]], 2.0), [[0, 1], [1, 0]])

    def test_identical_rows(self):
        np.testing.assert_array_equal(distance_matrix(np.ones((4, 3))), np.zeros((4, 4)))

    def test_three_scalars(self):
        np.testing.assert_array_equal(distance_matrix([[0.0], [1.0], [3.0]], 1.0),
                                      [[0, 1, 3], [1, 0, 2], [3, 2, 0]])

    def test_multivariate_matches_loop(self, rng):
        x = rng.normal(size=(12, 3))
        d = distance_matrix(x, 1.5)
        for k in range(12):
            for l in range(12):
                assert d[k, l] == pytest.approx(np.linalg.norm(x[k] - x[l]) ** 1.5, abs=1e-12)
        np.testing.assert_array_equal(d, d.T)
        assert np.all(np.diag(d) == 0)

    def test_rejects_single_point(self):
        with pytest.raises(DataError):
            distance_matrix([[1.0, 2.0]])

    def test_rejects_non_finite(self):
        with pytest.raises(DataError):
            distance_matrix([[0.0], [np.nan]])


class TestDoubleCenter:
    def test_two_by_two(self):
        np.testing.assert_allclose(double_center([[0, 1], [1, 0]]),
                                   0.5 * np.array([[-1, 1], [1, -1]]), atol=1e-15)

    def test_zero(self):
        np.testing.assert_array_equal(double_center(np.zeros((3, 3))), np.zeros((3, 3)))

    def test_matches_projection(self, rng):
        d = distance_matrix(rng.normal(size=(30, 2)))
        j = np.eye(30) - 1.0 / 30
        out = double_center(d)
        np.testing.assert_allclose(out, j @ d @ j, atol=1e-12)
        np.testing.assert_allclose(out.sum(axis=0), 0, atol=30 * 1e-12 * np.abs(out).max())
        np.testing.assert_allclose(out.sum(axis=1), 0, atol=30 * 1e-12 * np.abs(out).max())

    def test_rejects_non_square(self):
        with pytest.raises(DataError):
            double_center(np.zeros((2, 3)))


class TestSampleDCov:
    @pytest.fixture
    def pair(self):
        return DataMatrix(np.array([[0.0, 0.0], [1.0, 2.0]]), ("x", "y"))

    def test_hand_value_exponent_one(self, pair):
        assert sample_dcov2(pair, [0], [1], DCovConfig(exponent=1.0)) == pytest.approx(0.5, abs=1e-12)

    def test_hand_value_exponent_two(self, pair):
        assert sample_dcov2(pair, [0], [1], DCovConfig(exponent=2.0)) == pytest.approx(1.0, abs=1e-12)

    def test_constant_column(self, rng):
        data = DataMatrix(np.column_stack([np.full(20, 3.0), rng.normal(size=20)]))
        assert sample_dcov2(data, [0], [1]) == 0.0

    def test_rejects_empty(self, pair):
        with pytest.raises(DataError):
            sample_dcov2(pair, [], [1])

    @pytest.mark.parametrize("exponent", [0.5, 1.0, 2.0])
    def test_matches_explicit_oracle(self, rng, exponent):
        x = rng.normal(size=(15, 2))
        y = x[:, :1] ** 2 + rng.normal(size=(15, 1))
        data = DataMatrix(np.hstack([x, y]))
        got = sample_dcov2(data, [0, 1], [2], DCovConfig(exponent=exponent))
        assert got == pytest.approx(explicit_dcov2(x, y, exponent), rel=1e-10)

    def test_symmetric_exactly(self, rng):
        data = DataMatrix(rng.normal(size=(40, 3)))
        assert sample_dcov2(data, [0, 2], [1]) == sample_dcov2(data, [1], [0, 2])


class TestSampleDCor:
    def test_self_is_one(self, rng):
        data = DataMatrix(rng.normal(size=(25, 2)))
        assert sample_dcor2(data, [0, 1], [0, 1]) == pytest.approx(1.0, abs=1e-12)

    def test_constant_is_zero(self, rng):
        data = DataMatrix(np.column_stack([np.full(20, -1.0), rng.normal(size=20)]))
        assert sample_dcor2(data, [0], [1]) == 0.0
        assert sample_dcor2(data, [1], [0]) == 0.0

    def test_two_samples(self):
        data = DataMatrix(np.array([[0.0, 0.0], [1.0, 2.0]]))
        assert sample_dcor2(data, [0], [1]) == pytest.approx(1.0, abs=1e-12)

    def test_small_scale_not_degenerate(self, rng):
        x = rng.normal(size=50) * 1e-5
        data = DataMatrix(np.column_stack([x, x**2]))
        assert sample_dcor2(data, [0], [1]) > 0.1

    def test_bounded_on_fuzz(self):
        rng = np.random.default_rng(7)
        for _ in range(1000):
            n = int(rng.integers(2, 20))
            data = DataMatrix(rng.normal(size=(n, 3)) * rng.uniform(0.01, 100, size=3))
            r = sample_dcor2(data, [0], [1, 2])
            assert -1e-12 <= r <= 1 + 1e-9


class TestAugmentUnion:
    def test_append(self):
        data = DataMatrix(np.zeros((3, 4)))
        assert augment_union(data, [0], [2]) == (0, 2)
        assert augment_union(data, [1, 3], [0]) == (1, 3, 0)

    def test_rejects_overlap(self):
        with pytest.raises(DataError):
            augment_union(DataMatrix(np.zeros((3, 4))), [0, 1], [1])

    def test_matches_appended_matrix(self, rng):
        x = rng.normal(size=(20, 4))
        data = DataMatrix(x)
        union = augment_union(data, [1, 3], [0])
        y = x[:, 2:3]
        assert sample_dcov2(data, union, [2]) == pytest.approx(
            explicit_dcov2(np.hstack([x[:, [1, 3]], x[:, [0]]]), y), rel=1e-10)


class TestStandardize:
    def test_two_points(self):
        out = standardize(DataMatrix(np.array([[0.0], [2.0]])))
        np.testing.assert_allclose(out.values[:, 0], [-1.0, 1.0])

    def test_idempotent(self, rng):
        once = standardize(DataMatrix(rng.normal(3, 5, size=(50, 3))))
        twice = standardize(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-12)

    def test_constant_column(self):
        out = standardize(DataMatrix(np.array([[5.0, 1.0], [5.0, 2.0], [5.0, 4.0]])))
        np.testing.assert_array_equal(out.values[:, 0], 0.0)

    def test_moments(self, rng):
        out = standardize(DataMatrix(rng.normal(size=(40, 4)) * [1e-3, 1, 1e3, 7] + 9)).values
        np.testing.assert_allclose(out.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose(out.std(axis=0), 1, atol=1e-12)


class TestFastPath:
    def test_hand_value(self):
        assert fast_dcov2_univariate([0.0, 1.0], [0.0, 2.0]) == pytest.approx(0.5, abs=1e-15)

    def test_constant(self, rng):
        assert fast_dcov2_univariate(np.full(30, 2.0), rng.normal(size=30)) == pytest.approx(0, abs=1e-14)

    def test_rejects_other_exponent(self):
        with pytest.raises(DataError):
            fast_dcov2_univariate([0.0, 1.0], [0.0, 1.0], exponent=2.0)

    def test_thousand_gaussian_pairs(self, rng):
        x = rng.normal(size=1000)
        y = 0.3 * x + rng.normal(size=1000)
        assert fast_dcov2_univariate(x, y) == pytest.approx(dcov2(x, y), rel=1e-9)

    def test_ties(self, rng):
        x = rng.integers(0, 4, size=200).astype(float)
        y = rng.integers(0, 3, size=200).astype(float) + x
        assert fast_dcov2_univariate(x, y) == pytest.approx(dcov2(x, y), rel=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(2, 60), elements=finite), st.data())
    def test_equals_naive(self, x, data):
        y = data.draw(arrays(np.float64, x.shape[0], elements=finite))
        naive = dcov2(x, y)
        scale = np.abs(x).max() * np.abs(y).max()
        assert fast_dcov2_univariate(x, y) == pytest.approx(naive, rel=1e-9, abs=1e-12 * scale)


class TestInvariants:
    @settings(max_examples=200, deadline=None)
    @given(arrays(np.float64, st.tuples(st.integers(2, 25), st.integers(2, 4)), elements=finite),
           st.sampled_from([0.5, 1.0, 1.7, 2.0]))
    def test_nonnegative(self, x, exponent):
        from divdcov.dcov_core import centered_distances, dcov2_centered
        a = centered_distances(x[:, :1], exponent)
        b = centered_distances(x[:, 1:], exponent)
        scale = np.abs(a).max() * np.abs(b).max()
        assert dcov2_centered(a, b) >= -1e-12 * scale

    def test_one_sided_centering(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            n = int(rng.integers(3, 60))
            x = rng.normal(size=(n, 2))
            y = x[:, :1] * rng.normal() + rng.normal(size=(n, 1))
            ex = distance_matrix(x)
            ey_hat = double_center(distance_matrix(y))
            both = np.sum(double_center(ex) * ey_hat) / n**2
            one = np.sum(ex * ey_hat) / n**2
            assert one == pytest.approx(both, rel=1e-9)

    def test_data_matrix_validation(self):
        with pytest.raises(DataError):
            DataMatrix(np.zeros((1, 3)))
        with pytest.raises(DataError):
            DataMatrix(np.array([[0.0, np.inf], [1.0, 2.0]]))
        with pytest.raises(DataError):
            DataMatrix(np.zeros((3, 2)), ("a", "a"))
        with pytest.raises(DataError):
            DCovConfig(exponent=2.5)
        with pytest.raises(DataError):
            DCovConfig(eps=-1.0)
