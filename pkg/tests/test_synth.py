import numpy as np
import pytest

from embalign import SynthSpec, generate
from embalign.errors import SynthSpecError
from embalign.preprocess import center_and_normalize


@pytest.fixture(scope="module")
def small_data():
    return generate(SynthSpec(n=400, dim=12, components=6, noise_sigma=0.0,
                              seed=7, eval_pairs=60))


def test_shapes_and_labels(small_data):
    assert small_data.pool_a.data.shape == (400, 12)
    assert small_data.pool_b.data.shape == (400, 12)
    assert small_data.eval_a.data.shape == (60, 12)
    assert small_data.eval_b.data.shape == (60, 12)
    assert small_data.labels_a.shape == (400,)
    assert small_data.labels_b.shape == (400,)


def test_truth_map_is_orthogonal(small_data):
    q = small_data.truth.linear_map
    assert np.abs(q.T @ q - np.eye(q.shape[0])).max() <= 1e-10


def test_noiseless_eval_pairs_match_exactly_under_truth(small_data):
    # Center each eval view with its own mean: the views are related by an
    # affine map, so the centered views are related by scale * Q exactly and
    # normalized rows match with cosine 1.
    a_hat, _ = center_and_normalize(small_data.eval_a)
    b_hat, _ = center_and_normalize(small_data.eval_b)
    mapped = a_hat.data @ small_data.truth.linear_map
    cos = np.sum(mapped * b_hat.data, axis=1)
    np.testing.assert_allclose(cos, 1.0, atol=1e-9)


def test_training_pools_have_nonzero_mean(small_data):
    assert np.linalg.norm(small_data.pool_a.data.mean(axis=0)) > 1e-3
    assert np.linalg.norm(small_data.pool_b.data.mean(axis=0)) > 1e-3


def test_eval_rows_absent_from_training_pools(small_data):
    for pool in (small_data.pool_a.data, small_data.pool_b.data):
        for row in small_data.eval_a.data:
            assert not np.any(np.all(pool == row, axis=1))


def test_fixed_seed_bitwise_identical():
    spec = SynthSpec(n=100, dim=8, components=4, noise_sigma=0.05, seed=3, eval_pairs=10)
    first = generate(spec)
    second = generate(spec)
    np.testing.assert_array_equal(first.pool_a.data, second.pool_a.data)
    np.testing.assert_array_equal(first.pool_b.data, second.pool_b.data)
    np.testing.assert_array_equal(first.eval_b.data, second.eval_b.data)
    np.testing.assert_array_equal(first.truth.linear_map, second.truth.linear_map)


def test_component_occupancy_matches_across_halves():
    data = generate(SynthSpec(n=4000, dim=16, components=20, seed=0))
    counts_a = np.bincount(data.labels_a, minlength=20)
    counts_b = np.bincount(data.labels_b, minlength=20)
    total_variation = np.abs(counts_a - counts_b).sum() / (2 * 4000)
    assert total_variation <= 0.05


def test_no_eval_pairs_returns_none():
    data = generate(SynthSpec(n=50, dim=4, components=3, seed=1, eval_pairs=0))
    assert data.eval_a is None and data.eval_b is None


def test_noise_is_applied_to_target_view_only():
    quiet = generate(SynthSpec(n=80, dim=6, components=4, noise_sigma=0.0, seed=5))
    noisy = generate(SynthSpec(n=80, dim=6, components=4, noise_sigma=0.5, seed=5))
    np.testing.assert_array_equal(quiet.pool_a.data, noisy.pool_a.data)
    assert np.abs(quiet.pool_b.data - noisy.pool_b.data).max() > 0.1


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(n=0, dim=4, components=1),
        dict(n=10, dim=1, components=2),
        dict(n=10, dim=4, components=0),
        dict(n=10, dim=4, components=11),
        dict(n=10, dim=4, components=2, noise_sigma=-0.1),
        dict(n=10, dim=4, components=2, anisotropy=0.0),
        dict(n=10, dim=4, components=2, eval_pairs=-1),
    ],
)
def test_spec_validation(kwargs):
    with pytest.raises(SynthSpecError):
        SynthSpec(**kwargs)
