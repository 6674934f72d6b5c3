"""ADMM completion solvers over the quaternion QR tri-factorization.

Three variants share one outer loop:

qlnm_qqr_complete     column-norm shrinkage of the core factor D
irqlnm_qqr_complete   fixed reweighted column scaling of D (no hard
                      thresholding), rho defaults to 1
qlnm_qqr_sr_complete  adds a QDCT-domain sparsity term with entrywise
                      soft thresholding and a second multiplier

Every iteration performs exactly one alternating QR sweep warm-started
from the previous factors, refreshes D through the proximal step, restores
the observed entries exactly, and grows the penalty mu by rho up to
mu_max.  The loop stops when the relative change of the iterate falls
below tol or after max_iter iterations.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .quaternion import QMatrix, Quaternion, frobenius_norm, matmul, matmul_h
from .linalg import TriFactor, qqr
from .prox import l21_prox, soft_threshold_elementwise
from .qdct import QdctContext, default_axis, fqdct_l, iqdct_l

METHOD_QLNM_QQR = "qlnm-qqr"
METHOD_IRQLNM_QQR = "irqlnm-qqr"
METHOD_QLNM_QQR_SR = "qlnm-qqr-sr"
METHODS = (METHOD_QLNM_QQR, METHOD_IRQLNM_QQR, METHOD_QLNM_QQR_SR)

# (mu0, rho) defaults per method, tuned on 8-bit-scale images
_METHOD_DEFAULTS = {
    METHOD_QLNM_QQR: (0.003, 1.05),
    METHOD_IRQLNM_QQR: (0.003, 1.0),
    METHOD_QLNM_QQR_SR: (0.5, 1.05),
}

# rank presets per missing ratio, tuned for 256 x 256 images; scale the
# values with the image side for other sizes
RANK_PRESETS_256 = {
    METHOD_QLNM_QQR: {0.85: 65, 0.75: 90, 0.65: 105, 0.50: 125},
    METHOD_IRQLNM_QQR: {0.85: 115, 0.75: 125, 0.65: 155, 0.50: 170},
    METHOD_QLNM_QQR_SR: {0.85: 60, 0.75: 85, 0.65: 100, 0.50: 120},
}


@dataclass
class Mask:
    """Observed-entry indicator: True marks a kept entry."""
    observed: np.ndarray

    def __post_init__(self):
        self.observed = np.asarray(self.observed, dtype=bool)
        if self.observed.ndim != 2:
            raise ValueError("mask must be two-dimensional")

    @property
    def rows(self):
        return self.observed.shape[0]

    @property
    def cols(self):
        return self.observed.shape[1]

    @property
    def shape(self):
        return self.observed.shape

    @property
    def observed_count(self):
        return int(self.observed.sum())

    def project(self, X: QMatrix) -> QMatrix:
        """Zero every component of the unobserved entries."""
        self._check(X)
        return QMatrix(np.where(self.observed, X.a, 0),
                       np.where(self.observed, X.b, 0))

    def project_complement(self, X: QMatrix) -> QMatrix:
        """Zero the observed entries instead."""
        self._check(X)
        return QMatrix(np.where(self.observed, 0, X.a),
                       np.where(self.observed, 0, X.b))

    def _check(self, X: QMatrix):
        if X.shape != self.observed.shape:
            raise ValueError(
                f"mask shape {self.observed.shape} does not match {X.shape}")


@dataclass
class WeightSchedule:
    """Reweighting vectors: omega is 1 for the first ``v`` entries and then
    grows linearly to varsigma; a_hat = 1/omega scales the trailing columns
    down toward 1/varsigma."""
    omega: np.ndarray
    a_hat: np.ndarray


def make_weight_schedule(rank, varsigma, v) -> WeightSchedule:
    """Build the reweighting schedule.

    omega_l = 1 for l <= v, then omega_l = omega_{l-1} + (varsigma-1)/(rank-v);
    a_hat_l = 1/omega_l.
    """
    if varsigma <= 1:
        raise ValueError("varsigma must exceed 1")
    if not 1 < v < rank:
        raise ValueError(f"v must satisfy 1 < v < rank, got v={v}, rank={rank}")
    omega = np.ones(rank)
    step = (varsigma - 1.0) / (rank - v)
    for l in range(v, rank):
        omega[l] = omega[l - 1] + step
    return WeightSchedule(omega, 1.0 / omega)


@dataclass
class SolverConfig:
    """Hyperparameters for one completion run.

    mu0 and rho default per method when left as None.  The QDCT axis only
    matters for the sparse-regularized method.  The seed is carried for
    provenance (mask generation); the solver itself is deterministic.
    """
    method: str
    rank: int
    mu0: float | None = None
    rho: float | None = None
    mu_max: float = 1e7
    beta: float = 0.5
    varsigma: float = 10.0
    v: int = 3
    tol: float = 1e-6
    max_iter: int = 300
    qdct_axis: Quaternion = field(default_factory=default_axis)
    seed: int = 0

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}; "
                             f"expected one of {METHODS}")
        defaults = _METHOD_DEFAULTS[self.method]
        if self.mu0 is None:
            self.mu0 = defaults[0]
        if self.rho is None:
            self.rho = defaults[1]
        if self.rank < 1:
            raise ValueError("rank must be at least 1")
        if self.mu0 <= 0:
            raise ValueError("mu0 must be positive")
        if self.rho < 1:
            raise ValueError("rho must be at least 1")
        if self.mu_max < self.mu0:
            raise ValueError("mu_max must be at least mu0")
        if self.beta < 0:
            raise ValueError("beta must be nonnegative")
        if self.tol < 0:
            raise ValueError("tol must be nonnegative")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if self.method == METHOD_IRQLNM_QQR:
            if self.varsigma <= 1:
                raise ValueError("varsigma must exceed 1")
            if not 1 < self.v < self.rank:
                raise ValueError("v must satisfy 1 < v < rank")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")


@dataclass
class IterationStats:
    """Per-iteration diagnostics delivered to an optional trace callback."""
    index: int
    mu: float
    rel_change: float
    coeff_min: float
    coeff_max: float
    l_ortho_err: float
    r_ortho_err: float
    observed_exact: bool
    seconds: float


@dataclass
class SolverReport:
    """Outcome of one run: iterate counts, per-iteration relative changes
    ||X_{t+1} - X_t||_F / max(1, ||X_t||_F), wall times, and the final
    factors.  The observed entries of ``x`` equal the input exactly.
    ``sparse_code`` holds the final transform-domain code of the
    sparse-regularized method (None otherwise)."""
    method: str
    iterations: int
    converged: bool
    rel_changes: list
    iter_seconds: list
    mu_final: float
    tri: TriFactor
    x: QMatrix
    sparse_code: QMatrix | None = None


def _first_cols(qm: QMatrix, r) -> QMatrix:
    return QMatrix(qm.a[:, :r], qm.b[:, :r])


def _sweep(Xb: QMatrix, rfac_prev: QMatrix, r):
    """One warm-started alternating QR sweep; returns new L, R and the
    core matrix L^H Xb R^H the proximal step acts on.

    The tall product V = Xb^H L is formed once (conjugations fall on the
    thin operand only): it feeds the R-side QR directly and the core
    matrix is V^H R^H.
    """
    l_new = _first_cols(qqr(matmul(Xb, rfac_prev.H)).q, r)
    v = matmul_h(Xb, l_new)
    r_new = _first_cols(qqr(v).q, r).H
    d_hat = matmul_h(v, r_new.H)
    return l_new, r_new, d_hat


def _mm_into(A: QMatrix, B: QMatrix, out_a, out_b, scratch):
    """A @ B written into preallocated planes (one scratch plane)."""
    np.matmul(A.a, B.a, out=out_a)
    np.matmul(A.b, B.b.conj(), out=scratch)
    out_a -= scratch
    np.matmul(A.a, B.b, out=out_b)
    np.matmul(A.b, B.a.conj(), out=scratch)
    out_b += scratch


def _nsq(pa, pb):
    return (np.vdot(pa, pa) + np.vdot(pb, pb)).real


def _run(m0: QMatrix, mask: Mask, cfg: SolverConfig, d_update,
         sparse: bool, trace=None) -> SolverReport:
    rows, cols = m0.shape
    if not 1 <= cfg.rank <= min(rows, cols):
        raise ValueError(
            f"rank {cfg.rank} outside [1, {min(rows, cols)}] for "
            f"a {rows} x {cols} input")
    r = cfg.rank
    obs = mask.observed
    obs_idx = np.flatnonzero(obs.ravel())
    m0a_obs = m0.a.ravel()[obs_idx]
    m0b_obs = m0.b.ravel()[obs_idx]

    if sparse:
        return _run_sparse(m0, mask, cfg, d_update, trace,
                           obs_idx, m0a_obs, m0b_obs)

    # Off the mask the iterate equals L D R bit for bit, so the loop keeps
    # only two dense plane pairs (previous/current low-rank product) plus
    # the multiplier compressed to the observed entries.  The previous
    # product buffer turns into X + E/mu in place by scattering the
    # observed values.
    p_a = m0.a.copy()
    p_b = m0.b.copy()
    c_a = np.empty_like(p_a)
    c_b = np.empty_like(p_b)
    s_a = np.empty_like(p_a)
    s_b = np.empty_like(p_b)
    eobs_a = np.zeros_like(m0a_obs)
    eobs_b = np.zeros_like(m0b_obs)
    nsq_m0 = (np.vdot(m0a_obs, m0a_obs) + np.vdot(m0b_obs, m0b_obs)).real
    den = max(1.0, math.sqrt(nsq_m0))

    L = QMatrix.eye(rows, r)
    R = QMatrix.eye(r, cols)
    mu = float(cfg.mu0)
    rel_changes: list = []
    iter_seconds: list = []
    D = QMatrix.eye(r, r)
    it = 0

    def current_x():
        xa = c_a.copy()
        xb = c_b.copy()
        xa.ravel()[obs_idx] = m0a_obs
        xb.ravel()[obs_idx] = m0b_obs
        return QMatrix(xa, xb)

    for it in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        inv_mu = 1.0 / mu
        # previous buffer becomes X + E/mu (X itself on the first pass)
        if it > 1:
            p_a.ravel()[obs_idx] = m0a_obs + eobs_a * inv_mu
            p_b.ravel()[obs_idx] = m0b_obs + eobs_b * inv_mu
        Xb = QMatrix(p_a, p_b)

        L, R, d_hat = _sweep(Xb, R, r)
        D, coeffs = d_update(d_hat, mu)
        _mm_into(matmul(L, D), R, c_a, c_b, s_a)

        g_a = np.take(c_a.ravel(), obs_idx)
        g_b = np.take(c_b.ravel(), obs_idx)
        eobs_a += mu * (m0a_obs - g_a)
        eobs_b += mu * (m0b_obs - g_b)

        # ||X_new - X_old||: off the mask it is the change of the product;
        # on the mask both iterates hold the observed data
        np.subtract(c_a, p_a, out=s_a)
        np.subtract(c_b, p_b, out=s_b)
        s_a.ravel()[obs_idx] = 0
        s_b.ravel()[obs_idx] = 0
        rel = math.sqrt(_nsq(s_a, s_b)) / den
        rel_changes.append(rel)
        nsq_off = _nsq(c_a, c_b) - (np.vdot(g_a, g_a) + np.vdot(g_b, g_b)).real
        den = max(1.0, math.sqrt(max(nsq_off, 0.0) + nsq_m0))
        seconds = time.perf_counter() - t0
        iter_seconds.append(seconds)

        if trace is not None:
            x_cur = current_x()
            eye_r = QMatrix.eye(r, r)
            trace(IterationStats(
                index=it,
                mu=mu,
                rel_change=rel,
                coeff_min=float(coeffs.min()),
                coeff_max=float(coeffs.max()),
                l_ortho_err=frobenius_norm(matmul_h(L, L) - eye_r),
                r_ortho_err=frobenius_norm(matmul(R, R.H) - eye_r),
                observed_exact=bool(
                    np.array_equal(x_cur.a.ravel()[obs_idx], m0a_obs)
                    and np.array_equal(x_cur.b.ravel()[obs_idx], m0b_obs)),
                seconds=seconds,
            ))

        mu = min(cfg.rho * mu, cfg.mu_max)
        if rel < cfg.tol:
            break
        if it < cfg.max_iter:
            p_a, c_a = c_a, p_a
            p_b, c_b = c_b, p_b

    converged = bool(rel_changes) and rel_changes[-1] < cfg.tol
    return SolverReport(
        method=cfg.method,
        iterations=it,
        converged=converged,
        rel_changes=rel_changes,
        iter_seconds=iter_seconds,
        mu_final=mu,
        tri=TriFactor(L, D, R, r),
        x=current_x(),
    )


def _run_sparse(m0: QMatrix, mask: Mask, cfg: SolverConfig, d_update,
                trace, obs_idx, m0a_obs, m0b_obs) -> SolverReport:
    rows, cols = m0.shape
    r = cfg.rank
    x_a = m0.a.copy()
    x_b = m0.b.copy()
    xn_a = np.empty_like(x_a)
    xn_b = np.empty_like(x_b)
    xb_a = np.empty_like(x_a)
    xb_b = np.empty_like(x_b)
    ldr_a = np.empty_like(x_a)
    ldr_b = np.empty_like(x_b)
    s_a = np.empty_like(x_a)
    s_b = np.empty_like(x_b)
    # the transform couples all entries, so this multiplier stays dense
    e_a = np.zeros_like(x_a)
    e_b = np.zeros_like(x_b)
    ctx = QdctContext(cfg.qdct_axis, rows, cols)
    C = QMatrix.zeros(rows, cols)
    F = QMatrix.zeros(rows, cols)

    L = QMatrix.eye(rows, r)
    R = QMatrix.eye(r, cols)
    mu = float(cfg.mu0)
    rel_changes: list = []
    iter_seconds: list = []
    converged = False
    D = QMatrix.eye(r, r)
    it = 0

    for it in range(1, cfg.max_iter + 1):
        t0 = time.perf_counter()
        inv_mu = 1.0 / mu
        np.multiply(e_a, inv_mu, out=xb_a)
        xb_a += x_a
        np.multiply(e_b, inv_mu, out=xb_b)
        xb_b += x_b
        Xb = QMatrix(xb_a, xb_b)

        L, R, d_hat = _sweep(Xb, R, r)
        D, coeffs = d_update(d_hat, mu)
        _mm_into(matmul(L, D), R, ldr_a, ldr_b, s_a)

        np.multiply(F.a, inv_mu, out=s_a)
        s_a += C.a
        np.multiply(F.b, inv_mu, out=s_b)
        s_b += C.b
        G = iqdct_l(ctx, QMatrix(s_a, s_b))
        np.multiply(e_a, -inv_mu, out=xn_a)
        xn_a += ldr_a
        xn_a += G.a
        xn_a *= 0.5
        np.multiply(e_b, -inv_mu, out=xn_b)
        xn_b += ldr_b
        xn_b += G.b
        xn_b *= 0.5
        xn_a.ravel()[obs_idx] = m0a_obs
        xn_b.ravel()[obs_idx] = m0b_obs
        T = fqdct_l(ctx, QMatrix(xn_a, xn_b))
        C = soft_threshold_elementwise(T - F * inv_mu, 4.0 * cfg.beta / mu)
        F = F + (C - T) * mu
        # E += mu (X_new - LDR)
        np.subtract(xn_a, ldr_a, out=s_a)
        s_a *= mu
        e_a += s_a
        np.subtract(xn_b, ldr_b, out=s_b)
        s_b *= mu
        e_b += s_b

        np.subtract(xn_a, x_a, out=s_a)
        np.subtract(xn_b, x_b, out=s_b)
        rel = math.sqrt(_nsq(s_a, s_b)) / max(1.0, math.sqrt(_nsq(x_a, x_b)))
        rel_changes.append(rel)
        x_a, xn_a = xn_a, x_a
        x_b, xn_b = xn_b, x_b
        seconds = time.perf_counter() - t0
        iter_seconds.append(seconds)

        if trace is not None:
            eye_r = QMatrix.eye(r, r)
            trace(IterationStats(
                index=it,
                mu=mu,
                rel_change=rel,
                coeff_min=float(coeffs.min()),
                coeff_max=float(coeffs.max()),
                l_ortho_err=frobenius_norm(matmul_h(L, L) - eye_r),
                r_ortho_err=frobenius_norm(matmul(R, R.H) - eye_r),
                observed_exact=bool(
                    np.array_equal(x_a.ravel()[obs_idx], m0a_obs)
                    and np.array_equal(x_b.ravel()[obs_idx], m0b_obs)),
                seconds=seconds,
            ))

        mu = min(cfg.rho * mu, cfg.mu_max)
        if rel < cfg.tol:
            converged = True
            break

    return SolverReport(
        method=cfg.method,
        iterations=it,
        converged=converged,
        rel_changes=rel_changes,
        iter_seconds=iter_seconds,
        mu_final=mu,
        tri=TriFactor(L, D, R, r),
        x=QMatrix(x_a, x_b),
        sparse_code=C,
    )


def qlnm_qqr_complete(M: QMatrix, mask: Mask, cfg: SolverConfig,
                      trace=None) -> SolverReport:
    """Complete ``M`` by column-norm shrinkage of the tri-factor core.

    The D step solves the column-norm penalized least squares problem at
    weight 1/mu, giving per-column scaling (||d_s|| - 4/mu)_+ / ||d_s||.
    Unobserved entries of ``M`` are ignored (projected out on entry).
    """
    if cfg.method != METHOD_QLNM_QQR:
        raise ValueError(f"config method is {cfg.method!r}")

    def d_update(d_hat, mu):
        D, shrink = l21_prox(d_hat, 1.0 / mu)
        return D, shrink.coefficients

    return _run(mask.project(M), mask, cfg, d_update, sparse=False,
                trace=trace)


def irqlnm_qqr_complete(M: QMatrix, mask: Mask, cfg: SolverConfig,
                        weights: WeightSchedule | None = None,
                        trace=None) -> SolverReport:
    """Reweighted variant: D is scaled column-wise by the fixed a_hat
    schedule instead of hard thresholding.  ``weights`` overrides the
    schedule built from (rank, varsigma, v)."""
    if cfg.method != METHOD_IRQLNM_QQR:
        raise ValueError(f"config method is {cfg.method!r}")
    if weights is None:
        weights = make_weight_schedule(cfg.rank, cfg.varsigma, cfg.v)
    a_hat = np.asarray(weights.a_hat, dtype=np.float64)
    if a_hat.shape != (cfg.rank,):
        raise ValueError(f"schedule length {a_hat.shape} != rank {cfg.rank}")

    def d_update(d_hat, mu):
        return QMatrix(d_hat.a * a_hat, d_hat.b * a_hat), a_hat

    return _run(mask.project(M), mask, cfg, d_update, sparse=False,
                trace=trace)


def qlnm_qqr_sr_complete(M: QMatrix, mask: Mask, cfg: SolverConfig,
                         trace=None) -> SolverReport:
    """Sparse-regularized variant: unobserved entries average the low-rank
    reconstruction with the inverse QDCT of the sparse code, and the code
    is refreshed by entrywise soft thresholding at 4*beta/mu."""
    if cfg.method != METHOD_QLNM_QQR_SR:
        raise ValueError(f"config method is {cfg.method!r}")

    def d_update(d_hat, mu):
        D, shrink = l21_prox(d_hat, 1.0 / mu)
        return D, shrink.coefficients

    return _run(mask.project(M), mask, cfg, d_update, sparse=True,
                trace=trace)


def complete(M: QMatrix, mask: Mask, cfg: SolverConfig,
             trace=None) -> SolverReport:
    """Dispatch to the solver selected by ``cfg.method``."""
    if cfg.method == METHOD_QLNM_QQR:
        return qlnm_qqr_complete(M, mask, cfg, trace=trace)
    if cfg.method == METHOD_IRQLNM_QQR:
        return irqlnm_qqr_complete(M, mask, cfg, trace=trace)
    return qlnm_qqr_sr_complete(M, mask, cfg, trace=trace)
