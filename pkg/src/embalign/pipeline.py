"""End-to-end fitting, application, and evaluation of alignment models."""

from __future__ import annotations

import contextlib
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, LengthMismatchError
from .matching import anchor_alignment, build_pairs
from .neighbors import mean_cosine, unit_rows
from .preprocess import center_and_normalize
from .procrustes import orthogonal_procrustes
from .refine import refine_by_clustering, refine_by_matching
from .types import AlignmentModel, EmbeddingMatrix, PipelineConfig
from .util import as_float_matrix, spawn_seeds

STAGE_INITIAL = "initial"
STAGE_MATCHING = "refine_matching"
STAGE_CLUSTERING = "refine_clustering"

# Cap on floats per similarity block during evaluation (~64 MB).
_BLOCK_BUDGET = 8_000_000


@contextlib.contextmanager
def _stage(name: str):
    """Tag exceptions with the pipeline stage they escaped from."""
    try:
        yield
    except Exception as err:
        if not hasattr(err, "stage"):
            err.stage = name
        raise


def fit(xa_raw, xb_raw, config: PipelineConfig | None = None) -> AlignmentModel:
    """Learn a linear map from pool A's space to pool B's space.

    The pools are unpaired and may differ in size; both must share the
    same dimension. Stages: center/normalize both pools, discover matched
    anchors and build initial pairs, fit an orthogonal map, then run
    matching refinement and clustering refinement. Deterministic given
    ``config.seed``. Exceptions escaping a stage carry a ``stage``
    attribute naming it.
    """
    if config is None:
        config = PipelineConfig()
    a_raw = as_float_matrix(xa_raw, "pool A")
    b_raw = as_float_matrix(xb_raw, "pool B")
    if a_raw.shape[1] != b_raw.shape[1]:
        raise DimensionMismatchError(
            f"pool dimensions differ: {a_raw.shape[1]} vs {b_raw.shape[1]}"
        )

    with _stage("preprocess"):
        a_hat, stats_a = center_and_normalize(xa_raw)
        b_hat, stats_b = center_and_normalize(xb_raw)
    a = a_hat.data
    b = b_hat.data

    anchor_seed, match_seed, cluster_seed = spawn_seeds(config.seed, 3)

    with _stage("anchor_alignment"):
        rel_a, rel_b = anchor_alignment(
            a,
            b,
            n_clusters=config.anchor_clusters,
            n_runs=config.anchor_runs,
            qap_restarts=config.qap_restarts,
            seed=anchor_seed,
        )

    with _stage("pair_matching"):
        pairs = build_pairs(a, rel_a, b, rel_b, config.pair_neighbors)

    diagnostics = {STAGE_INITIAL: [], STAGE_MATCHING: [], STAGE_CLUSTERING: []}
    with _stage("initial_fit"):
        w = orthogonal_procrustes(pairs.source, pairs.target).w
        diagnostics[STAGE_INITIAL].append(mean_cosine(pairs.source @ w, pairs.target))

    with _stage(STAGE_MATCHING):
        w = refine_by_matching(
            a,
            b,
            w,
            iterations=config.match_iterations,
            alpha=config.alpha,
            n_neighbors=config.match_neighbors,
            sample_size=config.match_sample,
            seed=match_seed,
            trace=diagnostics[STAGE_MATCHING],
        )

    with _stage(STAGE_CLUSTERING):
        w = refine_by_clustering(
            a,
            b,
            w,
            alpha=config.alpha,
            n_clusters=config.refine_clusters,
            seed=cluster_seed,
            passes=config.refine_cluster_passes,
            trace=diagnostics[STAGE_CLUSTERING],
        )

    return AlignmentModel(
        w=w,
        stats_a=stats_a,
        stats_b=stats_b,
        diagnostics=diagnostics,
        config=config,
    )


def translate(model: AlignmentModel, x_raw) -> EmbeddingMatrix:
    """Map raw source-space rows into the target's normalized coordinates.

    Rows are centered with the source mean stored in the model, scaled to
    unit norm, and multiplied by the fitted map. Output rows are not
    re-normalized (the map is only softly orthogonal, and cosine-based
    consumers are scale-invariant anyway).
    """
    data = as_float_matrix(x_raw, "input")
    if data.shape[1] != model.d:
        raise DimensionMismatchError(
            f"input dimension {data.shape[1]} != model dimension {model.d}"
        )
    x_hat, _ = center_and_normalize(x_raw, mean=model.stats_a.mean)
    label = getattr(x_raw, "label", "")
    return EmbeddingMatrix(
        model.transform_normalized(x_hat.data),
        label=f"translated:{label}" if label else "translated",
    )


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Retrieval quality of a model on row-aligned evaluation pairs.

    top1: fraction of queries whose true counterpart ranks first
    avg_rank: mean 1-based rank of the true counterpart (ties counted
        pessimistically, i.e. the true match sorts after equal scores)
    mean_cosine: mean cosine between mapped queries and true counterparts
    n: number of evaluation pairs
    per_stage: final training-time mean cosine per pipeline stage
    """

    top1: float
    avg_rank: float
    mean_cosine: float
    n: int
    per_stage: dict | None = None

    def to_dict(self) -> dict:
        out = {
            "top1": self.top1,
            "avg_rank": self.avg_rank,
            "mean_cosine": self.mean_cosine,
            "n": self.n,
        }
        if self.per_stage is not None:
            out["per_stage"] = dict(self.per_stage)
        return out


def evaluate(model: AlignmentModel, eval_a_raw, eval_b_raw) -> EvalReport:
    """Score a model on parallel evaluation pairs (row i of A <-> row i of B).

    Queries are translated with the model; candidates are all evaluation
    targets centered/normalized with the model's target-space stats.
    Ranking uses cosine similarity with pessimistic tie handling.
    """
    a_raw = as_float_matrix(eval_a_raw, "eval A")
    b_raw = as_float_matrix(eval_b_raw, "eval B")
    if a_raw.shape[0] != b_raw.shape[0]:
        raise LengthMismatchError(
            f"evaluation pools differ in size: {a_raw.shape[0]} vs {b_raw.shape[0]}"
        )
    if b_raw.shape[1] != model.d:
        raise DimensionMismatchError(
            f"eval B dimension {b_raw.shape[1]} != model dimension {model.d}"
        )

    mapped = translate(model, eval_a_raw).data
    b_hat, _ = center_and_normalize(eval_b_raw, mean=model.stats_b.mean)

    queries = unit_rows(mapped)
    targets = unit_rows(b_hat.data)
    n = queries.shape[0]

    ranks = np.empty(n, dtype=np.int64)
    true_cos = np.empty(n, dtype=np.float64)
    block = max(1, _BLOCK_BUDGET // n)
    for start in range(0, n, block):
        stop = min(start + block, n)
        sims = queries[start:stop] @ targets.T
        diag = sims[np.arange(stop - start), np.arange(start, stop)]
        ranks[start:stop] = (sims >= diag[:, None]).sum(axis=1)
        true_cos[start:stop] = diag

    top1 = float(np.mean(ranks == 1))
    avg_rank = float(np.mean(ranks))
    assert abs(top1 - np.count_nonzero(ranks == 1) / n) < 1e-15
    assert avg_rank >= 1.0
    return EvalReport(
        top1=top1,
        avg_rank=avg_rank,
        mean_cosine=float(np.mean(true_cos)),
        n=n,
        per_stage=model.stage_summary() or None,
    )
