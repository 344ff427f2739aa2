import numpy as np
import pytest

from embalign import EmbeddingMatrix, center_and_normalize, drop_degenerate_rows
from embalign.errors import DegenerateRowError, EmptyInputError, NonFiniteInputError


class TestEmbeddingMatrix:
    def test_coerces_to_float64_readonly(self):
        m = EmbeddingMatrix([[1, 2], [3, 4]], label="x")
        assert m.data.dtype == np.float64
        assert not m.data.flags.writeable
        assert (m.n, m.d) == (2, 2)

    def test_rejects_empty(self):
        with pytest.raises(EmptyInputError):
            EmbeddingMatrix(np.empty((0, 3)))

    def test_rejects_thin(self):
        with pytest.raises(ValueError):
            EmbeddingMatrix([[1.0], [2.0]])

    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteInputError):
            EmbeddingMatrix([[1.0, np.nan], [0.0, 1.0]])


class TestCenterAndNormalize:
    def test_already_centered_unit_rows(self):
        x_hat, stats = center_and_normalize(np.array([[1.0, 0.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(x_hat.data, [[1.0, 0.0], [-1.0, 0.0]], atol=1e-15)
        np.testing.assert_allclose(stats.mean, [0.0, 0.0], atol=1e-15)

    def test_direct_arithmetic_case(self):
        # X = [[2,0],[0,2]] -> mean (1,1), rows (+-1, -+1)/sqrt(2)
        x_hat, stats = center_and_normalize(np.array([[2.0, 0.0], [0.0, 2.0]]))
        s = 1.0 / np.sqrt(2.0)
        np.testing.assert_allclose(stats.mean, [1.0, 1.0], atol=1e-15)
        np.testing.assert_allclose(x_hat.data, [[s, -s], [-s, s]], atol=1e-15)

    def test_identical_rows_all_degenerate(self):
        x = np.tile([3.0, 4.0, 5.0], (4, 1))
        with pytest.raises(DegenerateRowError) as info:
            center_and_normalize(x)
        assert info.value.rows == [0, 1, 2, 3]

    def test_empty_raises(self):
        with pytest.raises(EmptyInputError):
            center_and_normalize(np.empty((0, 4)))

    def test_rows_unit_and_pre_normalization_mean_zero(self, rng):
        x = rng.normal(size=(200, 12)) * 3.0 + rng.normal(size=12)
        x_hat, stats = center_and_normalize(x)
        np.testing.assert_allclose(np.linalg.norm(x_hat.data, axis=1), 1.0, atol=1e-9)
        centered = x - stats.mean
        assert np.abs(centered.mean(axis=0)).max() <= 1e-9

    def test_applying_twice_keeps_unit_rows_and_centered_mean(self, rng):
        x = rng.normal(size=(100, 6)) + 5.0
        once, _ = center_and_normalize(x)
        twice, stats2 = center_and_normalize(once)
        np.testing.assert_allclose(np.linalg.norm(twice.data, axis=1), 1.0, atol=1e-9)
        assert np.abs((once.data - stats2.mean).mean(axis=0)).max() <= 1e-9

    def test_explicit_mean_is_used(self, rng):
        x = rng.normal(size=(10, 4))
        mean = np.full(4, 0.25)
        x_hat, stats = center_and_normalize(x, mean=mean)
        np.testing.assert_array_equal(stats.mean, mean)
        expected = x - mean
        expected /= np.linalg.norm(expected, axis=1, keepdims=True)
        np.testing.assert_allclose(x_hat.data, expected, atol=1e-12)

    def test_mean_norm_share_in_unit_interval(self, rng):
        for offset in (0.0, 1.0, 100.0):
            _, stats = center_and_normalize(rng.normal(size=(50, 8)) + offset)
            assert 0.0 <= stats.mean_norm_share <= 1.0

    def test_label_is_preserved(self, rng):
        x = EmbeddingMatrix(rng.normal(size=(5, 3)), label="pool-a")
        x_hat, _ = center_and_normalize(x)
        assert x_hat.label == "pool-a"


class TestDropDegenerateRows:
    def test_keeps_clean_input(self, rng):
        x = rng.normal(size=(20, 5))
        cleaned, dropped = drop_degenerate_rows(x)
        assert dropped == []
        assert cleaned.n == 20

    def test_drops_row_at_the_mean(self):
        # Row 2 sits exactly at the mean of the others, and at the full
        # mean once they dominate.
        base = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        cleaned, dropped = drop_degenerate_rows(base)
        assert dropped == [2]
        assert cleaned.n == 4

    def test_all_degenerate_raises(self):
        with pytest.raises(EmptyInputError):
            drop_degenerate_rows(np.tile([1.0, 2.0], (3, 1)))
