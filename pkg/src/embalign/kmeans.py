"""Deterministic Lloyd k-means with k-means++ or explicit-centroid init.

Hand-rolled rather than delegated to a library because the callers rely on
contracts most implementations do not give: bitwise reproducibility from a
seed, explicit centroids honored verbatim on the first assignment, and
empty clusters repaired by promoting the point farthest from its centroid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooFewPointsError
from .util import as_float_matrix, spawn_seeds

DEFAULT_MAX_ITER = 300
# Default restart count when callers need comparable local optima across
# independent clusterings (matching the mainstream k-means default).
BEST_OF_INITS = 10


@dataclass(frozen=True, eq=False)
class Clustering:
    """Result of a k-means fit: centroids, assignments, and total inertia."""

    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    n_iter: int


def kmeans_fit(
    x,
    n_clusters: int,
    init="k-means++",
    seed=None,
    max_iter: int = DEFAULT_MAX_ITER,
    n_init: int = 1,
) -> Clustering:
    """Run Lloyd's algorithm to an assignment fixed point (or ``max_iter``).

    ``init`` is either the string "k-means++" or an explicit
    (n_clusters, d) centroid array used verbatim. With ``n_init`` > 1 (only
    valid for k-means++), the best of that many independently seeded runs
    is returned, judged by inertia. The result is a pure function of
    (x, n_clusters, init, seed, max_iter, n_init).
    """
    if n_init < 1:
        raise ValueError(f"n_init must be >= 1, got {n_init}")
    if n_init > 1:
        if not isinstance(init, str):
            raise ValueError("n_init > 1 makes no sense with explicit centroids")
        best = None
        for sub_seed in spawn_seeds(seed, n_init):
            run = kmeans_fit(x, n_clusters, init=init, seed=sub_seed, max_iter=max_iter)
            if best is None or run.inertia < best.inertia:
                best = run
        return best

    data = as_float_matrix(x, "points")
    n, d = data.shape
    if n_clusters < 1:
        raise ValueError(f"n_clusters must be >= 1, got {n_clusters}")
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    if n_clusters > n:
        raise TooFewPointsError(f"{n_clusters} clusters requested for {n} points")

    if isinstance(init, str):
        if init != "k-means++":
            raise ValueError(f"unknown init {init!r}")
        rng = np.random.default_rng(seed)
        centroids = _plus_plus_init(data, n_clusters, rng)
    else:
        centroids = np.array(init, dtype=np.float64)
        if centroids.shape != (n_clusters, d):
            raise ValueError(
                f"explicit centroids have shape {centroids.shape}, "
                f"expected {(n_clusters, d)}"
            )

    x_sq = np.einsum("ij,ij->i", data, data)
    assign, dist_sq, inertia = _assign(data, x_sq, centroids)

    n_iter = 0
    for _ in range(max_iter):
        centroids = _update(data, assign, dist_sq, n_clusters)
        new_assign, dist_sq, new_inertia = _assign(data, x_sq, centroids)
        # Lloyd steps never increase inertia; repair only relocates unused
        # centroids, which cannot hurt either.
        assert new_inertia <= inertia + 1e-9 * (1.0 + inertia)
        n_iter += 1
        converged = np.array_equal(new_assign, assign)
        assign, inertia = new_assign, new_inertia
        if converged:
            break

    counts = np.bincount(assign, minlength=n_clusters)
    if np.any(counts == 0):
        raise TooFewPointsError(
            "could not keep all clusters occupied; input has fewer than "
            f"{n_clusters} distinct points"
        )
    return Clustering(
        centroids=centroids,
        assignments=assign.astype(np.int64),
        inertia=float(inertia),
        n_iter=n_iter,
    )


def _plus_plus_init(data: np.ndarray, c: int, rng) -> np.ndarray:
    n = data.shape[0]
    centroids = np.empty((c, data.shape[1]), dtype=np.float64)
    first = int(rng.integers(n))
    centroids[0] = data[first]
    dist_sq = np.einsum("ij,ij->i", data - centroids[0], data - centroids[0])
    for j in range(1, c):
        total = dist_sq.sum()
        if total > 0.0:
            idx = int(rng.choice(n, p=dist_sq / total))
        else:
            idx = int(rng.integers(n))
        centroids[j] = data[idx]
        diff = data - centroids[j]
        dist_sq = np.minimum(dist_sq, np.einsum("ij,ij->i", diff, diff))
    return centroids


def _assign(data, x_sq, centroids):
    c_sq = np.einsum("ij,ij->i", centroids, centroids)
    # ||x - c||^2 = ||x||^2 - 2 x.c + ||c||^2; argmin ties go to the lowest index.
    cross = data @ centroids.T
    d2 = np.maximum(x_sq[:, None] - 2.0 * cross + c_sq[None, :], 0.0)
    assign = np.argmin(d2, axis=1)
    dist_sq = d2[np.arange(data.shape[0]), assign]
    return assign, dist_sq, float(dist_sq.sum())


def _update(data, assign, dist_sq, c):
    d = data.shape[1]
    sums = np.zeros((c, d), dtype=np.float64)
    np.add.at(sums, assign, data)
    counts = np.bincount(assign, minlength=c)
    centroids = np.empty_like(sums)
    occupied = counts > 0
    centroids[occupied] = sums[occupied] / counts[occupied, None]

    if not np.all(occupied):
        # Promote the farthest points to singleton centroids, one per
        # empty cluster, never reusing a point within the same repair pass.
        remaining = dist_sq.copy()
        for j in np.flatnonzero(~occupied):
            far = int(np.argmax(remaining))
            centroids[j] = data[far]
            remaining[far] = -1.0
    return centroids
