"""Unsupervised linear alignment of embedding spaces from unpaired pools.

Learns a single d x d map between two pools of embedding vectors that share
semantics but not coordinates: both pools are centered and normalized,
cluster anchors are discovered and matched across the pools, matched
neighborhoods yield training pairs for an orthogonal fit, and two
refinement loops tighten the result. Retrieval-style evaluation and a
synthetic ground-truth generator are included.
"""

from . import errors
from .fileio import load_model, read_embeddings, save_model, write_embeddings
from .kmeans import Clustering, kmeans_fit
from .matching import (
    PairSet,
    PermutationMatch,
    anchor_alignment,
    build_pairs,
    centroid_similarity,
    qap_2opt,
    qap_objective,
    relative_representation,
)
from .neighbors import top_k_cosine
from .pipeline import EvalReport, evaluate, fit, translate
from .preprocess import center_and_normalize, drop_degenerate_rows
from .procrustes import ProcrustesResult, orthogonal_procrustes, smooth_update
from .refine import refine_by_clustering, refine_by_matching
from .synth import GroundTruth, SynthData, SynthSpec, generate
from .types import AlignmentModel, EmbeddingMatrix, NormalizationStats, PipelineConfig

__version__ = "0.1.0"

__all__ = [
    "AlignmentModel",
    "Clustering",
    "EmbeddingMatrix",
    "EvalReport",
    "GroundTruth",
    "NormalizationStats",
    "PairSet",
    "PermutationMatch",
    "PipelineConfig",
    "ProcrustesResult",
    "SynthData",
    "SynthSpec",
    "anchor_alignment",
    "build_pairs",
    "center_and_normalize",
    "centroid_similarity",
    "drop_degenerate_rows",
    "errors",
    "evaluate",
    "fit",
    "generate",
    "kmeans_fit",
    "load_model",
    "orthogonal_procrustes",
    "qap_2opt",
    "qap_objective",
    "read_embeddings",
    "refine_by_clustering",
    "refine_by_matching",
    "relative_representation",
    "save_model",
    "smooth_update",
    "top_k_cosine",
    "translate",
    "write_embeddings",
]
