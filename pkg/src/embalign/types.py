"""Domain types: embedding pools, normalization records, fitted models, config."""

from __future__ import annotations

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import DimensionMismatchError, EmptyInputError, NonFiniteInputError


def _frozen_array(arr, dtype=np.float64) -> np.ndarray:
    out = np.ascontiguousarray(arr, dtype=dtype)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """A pool of embeddings, one vector per row, with a provenance label.

    Rows are 64-bit floats, finite, with n >= 1 and d >= 2. The backing
    array is marked read-only so instances can be shared freely.
    """

    data: np.ndarray
    label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ValueError(f"embedding data must be 2-D, got ndim={arr.ndim}")
        if arr.shape[0] < 1:
            raise EmptyInputError("embedding matrix has no rows")
        if arr.shape[1] < 2:
            raise ValueError(f"embedding dimension must be >= 2, got {arr.shape[1]}")
        if not np.all(np.isfinite(arr)):
            raise NonFiniteInputError("embedding matrix contains NaN or infinite entries")
        object.__setattr__(self, "data", _frozen_array(arr))

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def __repr__(self):
        return f"EmbeddingMatrix(n={self.n}, d={self.d}, label={self.label!r})"


@dataclass(frozen=True, eq=False)
class NormalizationStats:
    """Per-space centering record.

    ``mean`` is the column mean subtracted from every row before unit
    normalization. ``mean_norm_share`` is a diagnostic: the fraction of the
    average raw-row norm accounted for by the mean vector (in [0, 1]).
    """

    mean: np.ndarray
    mean_norm_share: float = 0.0

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).reshape(-1)
        if not np.all(np.isfinite(mean)):
            raise NonFiniteInputError("normalization mean contains non-finite entries")
        object.__setattr__(self, "mean", _frozen_array(mean))
        object.__setattr__(self, "mean_norm_share", float(self.mean_norm_share))

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def __repr__(self):
        return f"NormalizationStats(d={self.d}, mean_norm_share={self.mean_norm_share:.4f})"


@dataclass(frozen=True)
class PipelineConfig:
    """All pipeline hyperparameters with library defaults.

    anchor_clusters: clusters per anchor-discovery run
    anchor_runs: independent anchor-discovery runs whose relative
        representations are concatenated
    pair_neighbors: neighbors averaged when building the initial pairs
    qap_restarts: random restarts of the 2-OPT permutation search
    match_iterations: matching-refinement iterations (may be 0)
    match_neighbors: neighbors averaged inside matching refinement
    match_sample: rows sampled per matching-refinement iteration
        (clamped to the pool size at fit time)
    refine_clusters: clusters used by clustering refinement
    refine_cluster_passes: clustering-refinement passes (may be 0; values
        above 1 tend to slightly degrade results and trigger a warning)
    alpha: exponential-smoothing weight in (0, 1] for map updates
    seed: master seed; every stochastic stage derives its own stream
    """

    anchor_clusters: int = 20
    anchor_runs: int = 30
    pair_neighbors: int = 50
    qap_restarts: int = 30
    match_iterations: int = 100
    match_neighbors: int = 50
    match_sample: int = 10_000
    refine_clusters: int = 500
    refine_cluster_passes: int = 1
    alpha: float = 0.5
    seed: int = 0

    def __post_init__(self):
        positive = (
            "anchor_clusters",
            "anchor_runs",
            "pair_neighbors",
            "qap_restarts",
            "match_neighbors",
            "match_sample",
            "refine_clusters",
        )
        for name in positive:
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise ValueError(f"{name} must be an integer >= 1, got {value!r}")
        for name in ("match_iterations", "refine_cluster_passes"):
            value = getattr(self, name)
            if not isinstance(value, (int, np.integer)) or value < 0:
                raise ValueError(f"{name} must be an integer >= 0, got {value!r}")
        if not (0.0 < self.alpha <= 1.0):
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {self.seed!r}")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            out[f.name] = float(value) if f.name == "alpha" else int(value)
        return out

    @classmethod
    def from_dict(cls, values: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**values)


@dataclass(frozen=True, eq=False)
class AlignmentModel:
    """A fitted linear map between two embedding spaces.

    ``w`` maps row vectors from the source space (centered with
    ``stats_a.mean`` and unit-normalized) into the target's normalized
    coordinates. ``diagnostics`` maps stage name to the sequence of
    training-time mean-cosine values observed at that stage.
    """

    w: np.ndarray
    stats_a: NormalizationStats
    stats_b: NormalizationStats
    diagnostics: dict = field(default_factory=dict)
    config: PipelineConfig = field(default_factory=PipelineConfig)

    def __post_init__(self):
        w = np.asarray(self.w, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise ValueError(f"map must be square, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise NonFiniteInputError("map contains non-finite entries")
        if w.shape[0] != self.stats_a.d or w.shape[0] != self.stats_b.d:
            raise DimensionMismatchError(
                f"map is {w.shape[0]}-dimensional but stats are "
                f"{self.stats_a.d}/{self.stats_b.d}-dimensional"
            )
        object.__setattr__(self, "w", _frozen_array(w))

    @property
    def d(self) -> int:
        return self.w.shape[0]

    def transform_normalized(self, x_hat: np.ndarray) -> np.ndarray:
        """Apply the raw linear map to already centered-and-normalized rows.

        Skips centering and row normalization, so the result is exactly
        linear in the input.
        """
        x_hat = np.asarray(x_hat, dtype=np.float64)
        if x_hat.shape[-1] != self.d:
            raise DimensionMismatchError(
                f"input dimension {x_hat.shape[-1]} != model dimension {self.d}"
            )
        return x_hat @ self.w

    def stage_summary(self) -> dict:
        """Final mean-cosine value per stage, in stage order."""
        return {k: v[-1] for k, v in self.diagnostics.items() if len(v) > 0}

    def __repr__(self):
        return f"AlignmentModel(d={self.d}, stages={list(self.diagnostics)})"
