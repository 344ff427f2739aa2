import numpy as np
import pytest

import embalign.neighbors as nb
from embalign import top_k_cosine
from embalign.errors import TooManyNeighborsError


def brute_top_k(queries, pool, k):
    out = []
    for q in queries:
        cos = [
            float(np.dot(q, p) / (np.linalg.norm(q) * np.linalg.norm(p)))
            for p in pool
        ]
        order = sorted(range(len(pool)), key=lambda j: (-cos[j], j))[:k]
        out.append(sorted(order))
    return np.array(out)


def test_matches_brute_force(rng):
    queries = rng.normal(size=(20, 6))
    pool = rng.normal(size=(40, 6))
    for k in (1, 3, 40):
        got = top_k_cosine(queries, pool, k)
        np.testing.assert_array_equal(np.sort(got, axis=1), got)  # index-sorted rows
        np.testing.assert_array_equal(got, brute_top_k(queries, pool, k))


def test_boundary_ties_take_lowest_index():
    pool = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 0.0]])
    got = top_k_cosine(np.array([[2.0, 0.0]]), pool, 2)
    # rows 0, 2, 3 all tie at cosine 1; the two lowest indices win
    np.testing.assert_array_equal(got, [[0, 2]])


def test_blocking_does_not_change_result(rng, monkeypatch):
    queries = rng.normal(size=(9, 4))
    pool = rng.normal(size=(25, 4))
    full = top_k_cosine(queries, pool, 5)
    monkeypatch.setattr(nb, "_BLOCK_BUDGET", 1)  # force one query per block
    np.testing.assert_array_equal(top_k_cosine(queries, pool, 5), full)


def test_k_too_large(rng):
    with pytest.raises(TooManyNeighborsError):
        top_k_cosine(rng.normal(size=(2, 3)), rng.normal(size=(4, 3)), 5)
