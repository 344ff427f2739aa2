"""Two refinement loops that tighten an initial linear map.

Matching refinement repeatedly re-matches a sample of mapped source rows to
their nearest target rows and refits; clustering refinement matches cluster
centroids instead, using the mapped source centroids to seed the target
clustering so centroid pairs correspond by index.
"""

from __future__ import annotations

import warnings

import numpy as np

from .kmeans import BEST_OF_INITS, kmeans_fit
from .neighbors import mean_cosine, top_k_cosine
from .procrustes import orthogonal_procrustes, smooth_update
from .util import as_float_matrix, spawn_seeds


def refine_by_matching(
    x_hat_a,
    x_hat_b,
    w,
    iterations: int,
    alpha: float = 0.5,
    n_neighbors: int = 50,
    sample_size: int = 10_000,
    seed=None,
    trace=None,
) -> np.ndarray:
    """Iteratively refit the map against nearest-neighbor averages.

    Per iteration: sample ``sample_size`` source rows without replacement,
    map them with the current ``w``, average each mapped row's
    ``n_neighbors`` most cosine-similar target rows, refit an orthogonal
    map on (sample, averages), and blend it in with weight ``alpha``. The
    similarity search runs in the target's ambient coordinates.

    ``trace``, when given, receives one append per iteration with the mean
    cosine between the mapped sample and its matched averages (measured
    under the pre-update map). ``iterations=0`` returns ``w`` unchanged.
    """
    a = as_float_matrix(x_hat_a, "x_hat_a")
    b = as_float_matrix(x_hat_b, "x_hat_b")
    w = as_float_matrix(w, "w")
    if sample_size > a.shape[0]:
        warnings.warn(
            f"sample_size {sample_size} exceeds pool size {a.shape[0]}; clamping",
            stacklevel=2,
        )
        sample_size = a.shape[0]

    rng = np.random.default_rng(seed)
    for _ in range(iterations):
        idx = rng.choice(a.shape[0], size=sample_size, replace=False)
        sample = a[idx]
        mapped = sample @ w
        neighbor_idx = top_k_cosine(mapped, b, n_neighbors)
        matched = b[neighbor_idx].mean(axis=1)
        if trace is not None:
            trace.append(mean_cosine(mapped, matched))
        w_new = orthogonal_procrustes(sample, matched).w
        w = smooth_update(w, w_new, alpha)
    return w


def refine_by_clustering(
    x_hat_a,
    x_hat_b,
    w,
    alpha: float = 0.5,
    n_clusters: int = 500,
    seed=None,
    passes: int = 1,
    trace=None,
) -> np.ndarray:
    """Refit the map from cluster centroids matched via seeded clustering.

    Per pass: cluster the source pool, map its centroids with the current
    ``w``, cluster the target pool starting exactly from those mapped
    centroids (so centroid j of the target run is the counterpart of
    source centroid j), refit on the centroid pairs, and blend with
    ``alpha``. One pass is the intended use; more are accepted but tend to
    slightly degrade the alignment, so they trigger a warning.
    """
    a = as_float_matrix(x_hat_a, "x_hat_a")
    b = as_float_matrix(x_hat_b, "x_hat_b")
    w = as_float_matrix(w, "w")
    if passes > 1:
        warnings.warn(
            f"{passes} clustering-refinement passes requested; more than one "
            "tends to slightly degrade the alignment",
            stacklevel=2,
        )

    for pass_seed in spawn_seeds(seed, passes):
        cent_a = kmeans_fit(a, n_clusters, seed=pass_seed, n_init=BEST_OF_INITS).centroids
        mapped = cent_a @ w
        cent_b = kmeans_fit(b, n_clusters, init=mapped).centroids
        if trace is not None:
            trace.append(mean_cosine(mapped, cent_b))
        w_new = orthogonal_procrustes(cent_a, cent_b).w
        w = smooth_update(w, w_new, alpha)
    return w
