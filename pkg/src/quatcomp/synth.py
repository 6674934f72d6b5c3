"""Seeded generators for synthetic quaternion test matrices."""

from __future__ import annotations

import numpy as np

from .quaternion import QMatrix, Quaternion
from .qdct import QdctContext, default_axis, iqdct_l


def gaussian(rows, cols, rng) -> QMatrix:
    """Quaternion matrix with independent standard normal components."""
    p = rng.standard_normal((rows, cols, 4))
    return QMatrix.from_planes(p)


def random_lowrank(rows, cols, rank, seed) -> QMatrix:
    """Product of seeded Gaussian (rows x rank) and (rank x cols) factors."""
    if not 1 <= rank <= min(rows, cols):
        raise ValueError(f"rank {rank} outside [1, {min(rows, cols)}]")
    rng = np.random.default_rng(seed)
    return gaussian(rows, rank, rng) @ gaussian(rank, cols, rng)


def random_qdct_sparse_lowrank(rows, cols, rank, sparsity, seed,
                               axis: Quaternion | None = None) -> QMatrix:
    """Low-rank matrix that is also sparse in the QDCT domain.

    The spectrum is restricted to its first ``rank`` rows (which bounds the
    rank of the inverse transform by ``rank``) and extra in-band
    coefficients are zeroed at random until the requested fraction of the
    full spectrum is zero.
    """
    if not 1 <= rank <= min(rows, cols):
        raise ValueError(f"rank {rank} outside [1, {min(rows, cols)}]")
    band_zero = 1.0 - rank / rows
    if not band_zero <= sparsity < 1.0:
        raise ValueError(
            f"sparsity must lie in [{band_zero:.3f}, 1) for rank {rank}")
    rng = np.random.default_rng(seed)
    band = gaussian(rank, cols, rng)
    # zero a random in-band fraction to hit the overall sparsity target
    in_band_zero = (sparsity - band_zero) * rows / rank
    n_zero = int(round(in_band_zero * rank * cols))
    if n_zero:
        idx = rng.choice(rank * cols, size=n_zero, replace=False)
        keep = np.ones(rank * cols, dtype=bool)
        keep[idx] = False
        keep = keep.reshape(rank, cols)
        band = QMatrix(np.where(keep, band.a, 0), np.where(keep, band.b, 0))
    spec = QMatrix.zeros(rows, cols)
    spec.a[:rank, :] = band.a
    spec.b[:rank, :] = band.b
    ctx = QdctContext(axis if axis is not None else default_axis(), rows, cols)
    return iqdct_l(ctx, spec)
