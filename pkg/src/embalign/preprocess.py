"""Centering and unit normalization of embedding pools."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateRowError, EmptyInputError
from .types import EmbeddingMatrix, NormalizationStats
from .util import as_float_matrix

DEGENERATE_NORM = 1e-12


def _label(x) -> str:
    return getattr(x, "label", "")


def center_and_normalize(
    x, mean: np.ndarray | None = None
) -> tuple[EmbeddingMatrix, NormalizationStats]:
    """Subtract the column mean and scale every row to unit L2 norm.

    When ``mean`` is given it is used instead of the pool's own mean (the
    path used when applying a fitted model to new data). Rows whose
    centered norm falls below 1e-12 cannot be normalized and raise
    DegenerateRowError listing their indices.
    """
    data = as_float_matrix(x)
    if data.shape[0] == 0:
        raise EmptyInputError("cannot normalize an empty pool")

    if mean is None:
        mean = data.mean(axis=0)
    else:
        mean = np.asarray(mean, dtype=np.float64).reshape(-1)
        if mean.shape[0] != data.shape[1]:
            raise ValueError(
                f"mean has dimension {mean.shape[0]}, data has {data.shape[1]}"
            )

    centered = data - mean
    norms = np.linalg.norm(centered, axis=1)
    bad = np.flatnonzero(norms < DEGENERATE_NORM)
    if bad.size:
        raise DegenerateRowError(bad.tolist())

    raw_norms = np.linalg.norm(data, axis=1)
    mean_raw_norm = float(raw_norms.mean())
    share = 0.0
    if mean_raw_norm > 0.0:
        share = min(1.0, float(np.linalg.norm(mean)) / mean_raw_norm)

    normalized = centered / norms[:, None]
    stats = NormalizationStats(mean=mean, mean_norm_share=share)
    return EmbeddingMatrix(normalized, label=_label(x)), stats


def drop_degenerate_rows(x) -> tuple[EmbeddingMatrix, list[int]]:
    """Remove rows that would be degenerate under the pool's own centering.

    Dropping rows moves the mean, which can expose new degenerate rows, so
    the scan repeats until stable. Returns the cleaned pool and the dropped
    row indices (relative to the original input).
    """
    data = as_float_matrix(x)
    keep = np.arange(data.shape[0])
    dropped: list[int] = []
    while keep.size:
        centered = data[keep] - data[keep].mean(axis=0)
        norms = np.linalg.norm(centered, axis=1)
        bad = np.flatnonzero(norms < DEGENERATE_NORM)
        if bad.size == 0:
            break
        dropped.extend(keep[bad].tolist())
        keep = np.delete(keep, bad)
    if keep.size == 0:
        raise EmptyInputError("all rows are degenerate after centering")
    return EmbeddingMatrix(data[keep], label=_label(x)), sorted(dropped)
