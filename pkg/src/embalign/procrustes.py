"""Orthogonal map fitting from matched pairs, and smoothed updates."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import RankDeficiencyWarning, ShapeMismatchError, TooFewPairsError
from .util import as_float_matrix

_RANK_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class ProcrustesResult:
    """Fitted orthogonal map and the RMS row residual of the fit."""

    w: np.ndarray
    residual: float


def orthogonal_procrustes(source, target) -> ProcrustesResult:
    """Orthogonal ``w`` minimizing the Frobenius norm of ``source @ w - target``.

    Row-vector convention: each source row is mapped by right
    multiplication. Reflections are allowed. Warns (without failing) when
    there are fewer pairs than dimensions or the cross matrix is rank
    deficient, since the optimum is then not unique.
    """
    a = as_float_matrix(source, "source")
    b = as_float_matrix(target, "target")
    if a.shape != b.shape:
        raise ShapeMismatchError(f"pair shapes differ: {a.shape} vs {b.shape}")
    m, d = a.shape
    if m < 2:
        raise TooFewPairsError(f"need at least 2 pairs, got {m}")
    if m < d:
        warnings.warn(
            f"only {m} pairs for dimension {d}; the fit is underdetermined",
            RankDeficiencyWarning,
            stacklevel=2,
        )

    u, singular, vt = np.linalg.svd(a.T @ b)
    if singular[-1] < _RANK_TOL:
        warnings.warn(
            f"cross matrix is rank deficient (min singular value {singular[-1]:.3e})",
            RankDeficiencyWarning,
            stacklevel=2,
        )
    u, vt = _fix_svd_signs(u, vt)
    w = u @ vt
    residual = float(np.sqrt(np.mean(np.sum((a @ w - b) ** 2, axis=1))))
    return ProcrustesResult(w=w, residual=residual)


def _fix_svd_signs(u: np.ndarray, vt: np.ndarray):
    """Flip paired singular-vector signs so each u column's largest-magnitude
    entry is positive. Leaves the product u @ vt unchanged."""
    lead = np.abs(u).argmax(axis=0)
    signs = np.sign(u[lead, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs[None, :], vt * signs[:, None]


def smooth_update(w_old, w_new, alpha: float) -> np.ndarray:
    """Convex blend ``(1 - alpha) * w_old + alpha * w_new``."""
    w_old = as_float_matrix(w_old, "w_old")
    w_new = as_float_matrix(w_new, "w_new")
    if w_old.shape != w_new.shape:
        raise ShapeMismatchError(f"map shapes differ: {w_old.shape} vs {w_new.shape}")
    if not (0.0 < alpha <= 1.0):
        raise ValueError(f"alpha must lie in (0, 1], got {alpha!r}")
    return (1.0 - alpha) * w_old + alpha * w_new
