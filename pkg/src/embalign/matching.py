"""Centroid correspondence and pair construction between unpaired pools.

The two pools are clustered independently, their centroid sets are matched
by maximizing structural agreement between the centroid similarity
matrices (a quadratic assignment problem solved with restarted 2-OPT), and
every point is then described by its cosine similarities to the matched
anchors. Points close in that shared anchor coordinate system are treated
as corresponding and averaged into training pairs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatchError, ZeroAnchorError, ZeroCentroidError
from .kmeans import BEST_OF_INITS, kmeans_fit
from .neighbors import top_k_cosine, unit_rows
from .util import as_float_matrix, spawn_seeds

_ZERO_NORM = 1e-12
_MIN_GAIN = 1e-12


@dataclass(frozen=True, eq=False)
class PermutationMatch:
    """A centroid permutation and its structural-agreement score."""

    perm: np.ndarray
    score: float


@dataclass(frozen=True, eq=False)
class PairSet:
    """Matched (source row, averaged target rows) pairs for map fitting."""

    source: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "source", as_float_matrix(self.source, "source"))
        object.__setattr__(self, "target", as_float_matrix(self.target, "target"))
        if self.source.shape != self.target.shape:
            raise ShapeMismatchError(
                f"source {self.source.shape} and target {self.target.shape} differ"
            )

    @property
    def m(self) -> int:
        return self.source.shape[0]


def centroid_similarity(centroids) -> np.ndarray:
    """Pairwise cosine similarity matrix of a centroid set."""
    c = as_float_matrix(centroids, "centroids")
    norms = np.linalg.norm(c, axis=1)
    if np.any(norms <= _ZERO_NORM):
        bad = np.flatnonzero(norms <= _ZERO_NORM).tolist()
        raise ZeroCentroidError(f"centroids with near-zero norm: {bad}")
    u = c / norms[:, None]
    return u @ u.T


def qap_objective(sim_a: np.ndarray, sim_b: np.ndarray, perm) -> float:
    """Structural agreement of ``perm``: sum of sim_a[i,j] * sim_b[perm_i,perm_j]."""
    sim_a, sim_b = _check_pair(sim_a, sim_b)
    p = np.asarray(perm, dtype=np.int64)
    if sorted(p.tolist()) != list(range(sim_a.shape[0])):
        raise ValueError("perm is not a permutation of the centroid indices")
    return float(np.sum(sim_a * sim_b[np.ix_(p, p)]))


def qap_2opt(sim_a, sim_b, restarts: int = 30, seed=None) -> PermutationMatch:
    """Best-of-restarts 2-OPT search for the permutation maximizing agreement.

    Each restart begins at a uniformly random permutation and repeatedly
    applies the single pairwise swap with the largest strictly positive
    gain until no swap improves the objective. Deterministic given the
    seed; with a shared seed, the best score over r restarts is
    non-decreasing in r.
    """
    sim_a, sim_b = _check_pair(sim_a, sim_b)
    c = sim_a.shape[0]
    if c < 2:
        raise ValueError(f"need at least 2 centroids, got {c}")
    if restarts < 1:
        raise ValueError(f"restarts must be >= 1, got {restarts}")
    # The swap-gain recurrence below assumes symmetry, which holds for
    # similarity matrices up to rounding.
    sym_a = 0.5 * (sim_a + sim_a.T)
    sym_b = 0.5 * (sim_b + sim_b.T)

    rng = np.random.default_rng(seed)
    best_perm = None
    best_score = -np.inf
    for _ in range(restarts):
        perm = rng.permutation(c)
        perm = _local_search(sym_a, sym_b, perm)
        score = qap_objective(sim_a, sim_b, perm)
        if score > best_score:
            best_perm, best_score = perm, score
    return PermutationMatch(perm=best_perm, score=best_score)


def _check_pair(sim_a, sim_b):
    sim_a = as_float_matrix(sim_a, "sim_a")
    sim_b = as_float_matrix(sim_b, "sim_b")
    if sim_a.shape != sim_b.shape or sim_a.shape[0] != sim_a.shape[1]:
        raise ShapeMismatchError(
            f"similarity matrices must be square and equal-shaped, "
            f"got {sim_a.shape} and {sim_b.shape}"
        )
    return sim_a, sim_b


def _local_search(sa: np.ndarray, sb: np.ndarray, perm: np.ndarray) -> np.ndarray:
    perm = perm.copy()
    while True:
        t = sb[np.ix_(perm, perm)]
        gains = _swap_gains(sa, t)
        i, j = np.unravel_index(np.argmax(gains), gains.shape)
        if gains[i, j] <= _MIN_GAIN:
            return perm
        perm[i], perm[j] = perm[j], perm[i]


def _swap_gains(sa: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Objective gain of swapping positions (i, j), for all pairs at once.

    ``t`` is the target similarity matrix already permuted to the current
    order. Requires both matrices symmetric.
    """
    g = sa @ t.T
    r = np.einsum("ij,ij->i", sa, t)
    base = g + g.T - r[:, None] - r[None, :]
    sa_d = np.diag(sa)
    t_d = np.diag(t)
    term_i = (sa_d[:, None] - sa.T) * (t.T - t_d[:, None])
    term_j = (sa - sa_d[None, :]) * (t_d[None, :] - t)
    corners = (sa_d[:, None] - sa_d[None, :]) * (t_d[None, :] - t_d[:, None])
    gains = 2.0 * (base - term_i - term_j) + corners
    np.fill_diagonal(gains, -np.inf)
    return gains


def relative_representation(x_hat, anchors) -> np.ndarray:
    """Cosine similarity of every row to every anchor (n x c matrix)."""
    x = as_float_matrix(x_hat, "x_hat")
    a = as_float_matrix(anchors, "anchors")
    if x.shape[1] != a.shape[1]:
        raise ShapeMismatchError(
            f"rows have dimension {x.shape[1]}, anchors {a.shape[1]}"
        )
    a_norms = np.linalg.norm(a, axis=1)
    if np.any(a_norms <= _ZERO_NORM):
        bad = np.flatnonzero(a_norms <= _ZERO_NORM).tolist()
        raise ZeroAnchorError(f"anchors with near-zero norm: {bad}")
    return unit_rows(x) @ (a / a_norms[:, None]).T


def anchor_alignment(
    x_hat_a,
    x_hat_b,
    n_clusters: int,
    n_runs: int,
    qap_restarts: int = 30,
    seed=None,
) -> tuple[np.ndarray, np.ndarray]:
    """Build matched relative representations for both pools.

    Runs ``n_runs`` independent rounds of: cluster both pools, match the
    centroid sets by structural agreement, and express every point through
    cosine similarities to the matched anchors. The per-run blocks are
    concatenated column-wise, so each output has width n_runs * n_clusters
    and run ``i`` occupies columns [i * n_clusters, (i+1) * n_clusters).
    Run ``i`` uses sub-seeds that depend only on (seed, i).
    """
    a = as_float_matrix(x_hat_a, "x_hat_a")
    b = as_float_matrix(x_hat_b, "x_hat_b")
    if n_runs < 1:
        raise ValueError(f"n_runs must be >= 1, got {n_runs}")

    blocks_a = []
    blocks_b = []
    for run_seed in spawn_seeds(seed, n_runs):
        seed_a, seed_b, seed_qap = spawn_seeds(run_seed, 3)
        cent_a = kmeans_fit(a, n_clusters, seed=seed_a, n_init=BEST_OF_INITS).centroids
        cent_b = kmeans_fit(b, n_clusters, seed=seed_b, n_init=BEST_OF_INITS).centroids
        match = qap_2opt(
            centroid_similarity(cent_a),
            centroid_similarity(cent_b),
            restarts=qap_restarts,
            seed=seed_qap,
        )
        blocks_a.append(relative_representation(a, cent_a))
        blocks_b.append(relative_representation(b, cent_b[match.perm]))
    return np.hstack(blocks_a), np.hstack(blocks_b)


def build_pairs(source_rows, rel_source, target, rel_target, n_neighbors: int) -> PairSet:
    """Pair every source row with the mean of its matched target rows.

    For source row i, the ``n_neighbors`` target rows whose relative
    representations are most cosine-similar to rel_source[i] are averaged
    in the target's absolute coordinates. Ties at the neighborhood boundary
    go to the lowest target index.
    """
    src = as_float_matrix(source_rows, "source_rows")
    rel_src = as_float_matrix(rel_source, "rel_source")
    tgt = as_float_matrix(target, "target")
    rel_tgt = as_float_matrix(rel_target, "rel_target")
    if src.shape[0] != rel_src.shape[0]:
        raise ShapeMismatchError(
            f"{src.shape[0]} source rows but {rel_src.shape[0]} relative rows"
        )
    if tgt.shape[0] != rel_tgt.shape[0]:
        raise ShapeMismatchError(
            f"{tgt.shape[0]} target rows but {rel_tgt.shape[0]} relative rows"
        )
    if rel_src.shape[1] != rel_tgt.shape[1]:
        raise ShapeMismatchError(
            f"relative widths differ: {rel_src.shape[1]} vs {rel_tgt.shape[1]}"
        )
    idx = top_k_cosine(rel_src, rel_tgt, n_neighbors)
    return PairSet(source=src, target=tgt[idx].mean(axis=1))
