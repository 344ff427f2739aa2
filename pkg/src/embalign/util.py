"""Small shared helpers: input coercion and seed derivation."""

from __future__ import annotations

import numpy as np

from .errors import NonFiniteInputError


def as_float_matrix(x, name: str = "input") -> np.ndarray:
    """Coerce ``x`` (EmbeddingMatrix or array-like) to a finite 2-D float64 array."""
    data = getattr(x, "data", x)
    arr = np.ascontiguousarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be a 2-D matrix, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteInputError(f"{name} contains NaN or infinite entries")
    return arr


def as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def spawn_seeds(seed, n: int) -> list[np.random.SeedSequence]:
    """Derive ``n`` independent child seeds.

    Child ``i`` depends only on ``seed`` and ``i``, never on ``n`` or on
    previous spawns, so a longer run shares its prefix with a shorter one.
    """
    ss = as_seed_sequence(seed)
    return [
        np.random.SeedSequence(entropy=ss.entropy, spawn_key=ss.spawn_key + (i,))
        for i in range(n)
    ]
