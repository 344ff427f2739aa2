"""Exact blockwise k-nearest-neighbor search under cosine similarity."""

from __future__ import annotations

import numpy as np

from .errors import TooManyNeighborsError

# Cap on floats held per similarity block (~64 MB).
_BLOCK_BUDGET = 8_000_000


def unit_rows(x: np.ndarray) -> np.ndarray:
    """Scale rows to unit norm; zero rows are left as zeros."""
    norms = np.linalg.norm(x, axis=1, keepdims=True)
    return x / np.where(norms > 0.0, norms, 1.0)


def top_k_cosine(queries: np.ndarray, pool: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k pool rows most cosine-similar to each query row.

    Exact search; similarity ties at the selection boundary are broken
    toward the lowest pool index. Each output row is sorted by index, not
    by similarity (callers aggregate the neighborhood, so order within it
    does not matter).
    """
    n_pool = pool.shape[0]
    if k > n_pool:
        raise TooManyNeighborsError(f"k={k} exceeds pool size {n_pool}")
    queries = np.asarray(queries, dtype=np.float64)
    pool_unit = unit_rows(np.asarray(pool, dtype=np.float64))

    out = np.empty((queries.shape[0], k), dtype=np.int64)
    block = max(1, _BLOCK_BUDGET // max(1, n_pool))
    for start in range(0, queries.shape[0], block):
        q = unit_rows(queries[start : start + block])
        sims = q @ pool_unit.T
        out[start : start + q.shape[0]] = _select_top_k(sims, k)
    return out


def _select_top_k(sims: np.ndarray, k: int) -> np.ndarray:
    n_rows, n_pool = sims.shape
    if k == n_pool:
        return np.tile(np.arange(n_pool, dtype=np.int64), (n_rows, 1))

    part = np.argpartition(-sims, k - 1, axis=1)[:, :k]
    kth = sims[np.arange(n_rows)[:, None], part].min(axis=1)

    above = sims > kth[:, None]
    n_above = above.sum(axis=1)
    at = sims == kth[:, None]
    # Fill the remaining slots with the lowest-index rows at the threshold.
    take_at = at & (np.cumsum(at, axis=1) <= (k - n_above)[:, None])
    selected = above | take_at
    return np.nonzero(selected)[1].reshape(n_rows, k).astype(np.int64)


def mean_cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Mean cosine similarity between corresponding rows of two matrices."""
    num = np.einsum("ij,ij->i", a, b)
    den = np.linalg.norm(a, axis=1) * np.linalg.norm(b, axis=1)
    den = np.where(den > 0.0, den, 1.0)
    return float(np.mean(num / den))
