"""Closed-form proximal operators used by the completion solvers.

The column-norm shrinkages follow the quaternion-derivative convention in
which the group threshold carries a factor 4 (l21_prox), while the
singular-value and weighted-column operators use the plain threshold.  The
two conventions are tied together by the identity
weighted_l21_prox(Y, 4*beta*mu*ones, mu) == l21_prox(Y, beta).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quaternion import QMatrix, column_norms, entry_moduli, scale_columns
from .linalg import qsvd


@dataclass
class ColumnShrinkage:
    """Per-column scaling factors in [0, 1]; a zero means the column's
    norm fell at or below the threshold."""
    coefficients: np.ndarray


def _shrink_factors(norms, thresholds):
    """(norm - threshold)_+ / norm with 0/0 defined as 0."""
    out = np.zeros_like(norms)
    np.divide(np.maximum(norms - thresholds, 0.0), norms,
              out=out, where=norms > 0)
    return out


def l21_prox(Y: QMatrix, beta: float):
    """Column-norm shrinkage: column n is scaled by
    (||Y_n|| - 4*beta)_+ / ||Y_n||.

    Returns the shrunk matrix and the scaling coefficients.
    """
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    norms = column_norms(Y)
    coef = _shrink_factors(norms, 4.0 * beta)
    return scale_columns(Y, coef), ColumnShrinkage(coef)


def weighted_l21_prox(Y: QMatrix, weights, mu: float) -> QMatrix:
    """Per-column weighted shrinkage: column m is scaled by
    (sigma_m - w_m/mu)_+ / sigma_m with sigma_m = ||Y_m||, the single
    singular value of the column viewed as a one-column matrix.
    """
    w = np.asarray(weights, dtype=np.float64)
    if w.shape != (Y.cols,):
        raise ValueError(f"expected {Y.cols} weights, got {w.shape}")
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if mu <= 0:
        raise ValueError("mu must be positive")
    norms = column_norms(Y)
    coef = _shrink_factors(norms, w / mu)
    return scale_columns(Y, coef)


def qsvt_prox(Y: QMatrix, mu: float) -> QMatrix:
    """Singular value soft thresholding U diag((sigma - mu)_+) V^H."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    f = qsvd(Y)
    shrunk = np.maximum(f.sigma - mu, 0.0)
    return scale_columns(f.u, shrunk) @ f.v.H


def weighted_qsvt_prox(Y: QMatrix, weights, mu: float) -> QMatrix:
    """Weighted singular value thresholding U diag((sigma_l - mu*w_l)_+) V^H.

    The weights must be nonnegative and nondecreasing so the thresholded
    values stay sorted; a decreasing vector is rejected.
    """
    w = np.asarray(weights, dtype=np.float64)
    if np.any(w < 0):
        raise ValueError("weights must be nonnegative")
    if np.any(np.diff(w) < 0):
        raise ValueError("weights must be nondecreasing")
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    f = qsvd(Y)
    if w.shape != f.sigma.shape:
        raise ValueError(f"expected {f.sigma.size} weights, got {w.shape}")
    shrunk = np.maximum(f.sigma - mu * w, 0.0)
    return scale_columns(f.u, shrunk) @ f.v.H


def soft_threshold_elementwise(Y: QMatrix, t: float) -> QMatrix:
    """Entrywise shrinkage x -> (x/|x|) max(|x| - t, 0); zeros stay zero."""
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    mods = entry_moduli(Y)
    scale = np.zeros_like(mods)
    np.divide(np.maximum(mods - t, 0.0), mods, out=scale, where=mods > 0)
    return QMatrix(Y.a * scale, Y.b * scale)
