"""Quaternion matrix factorizations.

qqr       thin QR through quaternion Householder reflections
qsvd      singular value decomposition through the equivalent complex matrix
cqsvd_qqr alternating QR tri-factorization L D R whose diagonal moduli
          converge to the leading singular values
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .quaternion import QMatrix, matmul, matmul_h

_PAIR_RTOL = 1e-8


@dataclass
class QqrResult:
    """Thin QR factors: q has orthonormal columns, r is upper triangular
    with a real nonnegative diagonal (entry phases absorbed into q)."""
    q: QMatrix
    r: QMatrix


@dataclass
class QsvdResult:
    """Thin SVD factors: u (M x k) and v (N x k) have orthonormal columns,
    sigma is real nonnegative and sorted descending, k = min(M, N)."""
    u: QMatrix
    sigma: np.ndarray
    v: QMatrix


@dataclass
class TriFactor:
    """L D R factors: l (M x r) and rfac (r x N) with orthonormal
    columns/rows, d (r x r) lower triangular."""
    l: QMatrix
    d: QMatrix
    rfac: QMatrix
    target_rank: int


def _col_dot(ua, ub, wa, wb):
    """Quaternion inner products u^H w against one vector or a block of
    columns, returned as a Cayley-Dickson pair."""
    da = ua.conj() @ wa + (ub.conj() @ wb).conj()
    db = ua.conj() @ wb - (ub.conj() @ wa).conj()
    return da, db


def qqr(A: QMatrix) -> QqrResult:
    """Thin quaternion QR via Householder reflections.

    Rank-deficient columns produce zero diagonal entries rather than an
    error.  For each pivot x the reflector direction is v = x + u e1 with
    u = (x1/|x1|) ||x||, which keeps v^H x real and avoids cancellation.
    """
    m, n = A.shape
    k = min(m, n)
    ra = A.a.copy()
    rb = A.b.copy()
    reflectors: list = []

    for c in range(k):
        xa = ra[c:, c]
        xb = rb[c:, c]
        col_nsq = (np.vdot(xa, xa) + np.vdot(xb, xb)).real
        if col_nsq == 0.0:
            reflectors.append(None)
            continue
        nrm = math.sqrt(col_nsq)
        p_a = xa[0]
        p_b = xb[0]
        pmod = math.sqrt(abs(p_a) ** 2 + abs(p_b) ** 2)
        if pmod == 0.0:
            u_a, u_b = complex(nrm), 0j
        else:
            s = nrm / pmod
            u_a, u_b = p_a * s, p_b * s
        va = xa.copy()
        vb = xb.copy()
        va[0] += u_a
        vb[0] += u_b
        vnsq = (np.vdot(va, va) + np.vdot(vb, vb)).real
        tau = 2.0 / vnsq
        reflectors.append((va, vb, tau))

        if c + 1 < n:
            Ba = ra[c:, c + 1:]
            Bb = rb[c:, c + 1:]
            wa = va.conj() @ Ba + (vb.conj() @ Bb).conj()
            wb = va.conj() @ Bb - (vb.conj() @ Ba).conj()
            wa *= tau
            wb *= tau
            Ba -= np.outer(va, wa) - np.outer(vb, wb.conj())
            Bb -= np.outer(va, wb) + np.outer(vb, wa.conj())
        # the pivot column lands on -u e1 exactly
        ra[c, c] = -u_a
        rb[c, c] = -u_b
        ra[c + 1:, c] = 0
        rb[c + 1:, c] = 0

    qa = np.eye(m, k, dtype=np.complex128)
    qb = np.zeros((m, k), dtype=np.complex128)
    for c in range(k - 1, -1, -1):
        if reflectors[c] is None:
            continue
        va, vb, tau = reflectors[c]
        Ba = qa[c:, c:]
        Bb = qb[c:, c:]
        wa = va.conj() @ Ba + (vb.conj() @ Bb).conj()
        wb = va.conj() @ Bb - (vb.conj() @ Ba).conj()
        wa *= tau
        wb *= tau
        Ba -= np.outer(va, wa) - np.outer(vb, wb.conj())
        Bb -= np.outer(va, wb) + np.outer(vb, wa.conj())

    # absorb diagonal phases so r has a real nonnegative diagonal
    for c in range(k):
        d_a = ra[c, c]
        d_b = rb[c, c]
        dm = math.sqrt(abs(d_a) ** 2 + abs(d_b) ** 2)
        if dm == 0.0:
            continue
        p_a = d_a.conjugate() / dm
        p_b = -d_b / dm
        row_a = ra[c, c:].copy()
        row_b = rb[c, c:].copy()
        ra[c, c:] = p_a * row_a - p_b * row_b.conj()
        rb[c, c:] = p_a * row_b + p_b * row_a.conj()
        ra[c, c] = dm
        rb[c, c] = 0
        # compensate: column c of q gets the inverse phase on the right
        s_a = d_a / dm
        s_b = d_b / dm
        col_a = qa[:, c].copy()
        col_b = qb[:, c].copy()
        qa[:, c] = col_a * s_a - col_b * s_b.conjugate()
        qb[:, c] = col_a * s_b + col_b * s_a.conjugate()

    return QqrResult(QMatrix(qa, qb), QMatrix(ra[:k, :], rb[:k, :]))


def _symplectic_columns(block, m):
    """Pick one complex vector per quaternion direction from a chi-space
    singular subspace.

    ``block`` holds an orthonormal basis (2m x d, d even) of a singular
    subspace of an equivalent complex matrix.  Such subspaces are closed
    under the antilinear pairing u -> J conj(u) with J = [[0, I], [-I, 0]],
    and u is always orthogonal to its own partner, so repeatedly removing
    the two-dimensional complex span of (u, J conj(u)) yields d/2 vectors
    whose quaternion counterparts are exactly orthonormal.
    """
    picked = []
    work = block
    while work.shape[1] > 0:
        u = work[:, 0]
        u = u / np.linalg.norm(u)
        ut = np.concatenate([u[m:].conj(), -u[:m].conj()])
        picked.append(u)
        rest = work[:, 1:]
        if rest.shape[1] == 0:
            break
        rest = rest - np.outer(u, u.conj() @ rest)
        rest = rest - np.outer(ut, ut.conj() @ rest)
        # re-orthonormalize and drop the dimension collapsed by the removal
        ub, sb, _ = np.linalg.svd(rest, full_matrices=False)
        keep = int((sb > 0.5).sum())
        work = ub[:, :keep]
    return picked


def _vectors_to_qmatrix(vectors, m):
    cols = len(vectors)
    ua = np.empty((m, cols), dtype=np.complex128)
    ub = np.empty((m, cols), dtype=np.complex128)
    for idx, u in enumerate(vectors):
        ua[:, idx] = u[:m]
        ub[:, idx] = -u[m:].conj()
    return ua, ub


def _group_pairs(s2, scale):
    """Split the sorted chi singular values into even-sized groups of
    (near-)equal values; each group is one degenerate quaternion subspace."""
    gtol = max(scale * 1e-12, 1e-300)
    groups = []
    start = 0
    for i in range(1, len(s2) + 1):
        if i == len(s2) or s2[start] - s2[i] > gtol:
            groups.append(list(range(start, i)))
            start = i
    # enforce even sizes: a split pair means the gap fell inside one pair
    merged = []
    for g in groups:
        if merged and len(merged[-1]) % 2 == 1:
            merged[-1].extend(g)
        else:
            merged.append(g)
    return merged


def qsvd(A: QMatrix) -> QsvdResult:
    """Quaternion SVD through the complex SVD of the equivalent matrix.

    The singular values of chi(A) appear in pairs; one value per pair is
    the quaternion singular value.  Left vectors are assembled per
    degenerate subspace with the symplectic pairing, right vectors follow
    from v = A^H u / sigma (null directions are assembled the same way on
    the right subspace), and v is re-orthonormalized to machine precision.
    """
    m, n = A.shape
    k = min(m, n)
    chi = np.block([[A.a, A.b], [-A.b.conj(), A.a.conj()]])
    u2, s2, v2h = np.linalg.svd(chi, full_matrices=False)
    smax = float(s2[0]) if s2.size else 0.0

    gap = np.abs(s2[0::2] - s2[1::2])
    if np.any(gap > _PAIR_RTOL * max(smax, 1e-300)):
        raise ValueError("chi singular values failed to pair up; "
                         "input is not a valid quaternion matrix image")
    sigma = 0.5 * (s2[0::2] + s2[1::2])

    vectors = []
    for group in _group_pairs(s2, smax):
        vectors.extend(_symplectic_columns(u2[:, group], m))
    ua, ub = _vectors_to_qmatrix(vectors[:k], m)
    u = QMatrix(ua, ub)

    null_cutoff = 100.0 * max(m, n) * np.finfo(np.float64).eps * smax
    nonnull = sigma > null_cutoff
    va = np.zeros((n, k), dtype=np.complex128)
    vb = np.zeros((n, k), dtype=np.complex128)
    if np.any(nonnull):
        w = matmul_h(A, QMatrix(ua[:, nonnull], ub[:, nonnull]))
        inv = 1.0 / sigma[nonnull]
        va[:, nonnull] = w.a * inv
        vb[:, nonnull] = w.b * inv
    if not np.all(nonnull):
        v2 = v2h.conj().T
        null_vecs = []
        for group in _group_pairs(s2, smax):
            if sigma[group[0] // 2] <= null_cutoff:
                null_vecs.extend(_symplectic_columns(v2[:, group], n))
        ga, gb = _vectors_to_qmatrix(null_vecs, n)
        idx = np.flatnonzero(~nonnull)
        va[:, idx] = ga[:, :idx.size]
        vb[:, idx] = gb[:, :idx.size]

    _orthonormalize_columns(va, vb)
    return QsvdResult(u, sigma, QMatrix(va, vb))


def _orthonormalize_columns(ca, cb):
    """In-place quaternion modified Gram-Schmidt on near-orthonormal
    columns (left-to-right, right-multiplying scalar coefficients)."""
    cols = ca.shape[1]
    for c in range(cols):
        nrm = math.sqrt((np.vdot(ca[:, c], ca[:, c])
                         + np.vdot(cb[:, c], cb[:, c])).real)
        if nrm == 0.0:
            continue
        ca[:, c] /= nrm
        cb[:, c] /= nrm
        if c + 1 == cols:
            break
        da, db = _col_dot(ca[:, c], cb[:, c], ca[:, c + 1:], cb[:, c + 1:])
        ca[:, c + 1:] -= (np.outer(ca[:, c], da) - np.outer(cb[:, c], db.conj()))
        cb[:, c + 1:] -= (np.outer(ca[:, c], db) + np.outer(cb[:, c], da.conj()))


def nuclear_norm(A: QMatrix) -> float:
    """Sum of the quaternion singular values."""
    return float(qsvd(A).sigma.sum())


def tri_init(rows, cols, rank) -> TriFactor:
    """Identity-based starting point L = eye(M, r), D = I_r, R = eye(r, N)."""
    if not 1 <= rank <= min(rows, cols):
        raise ValueError(f"rank {rank} outside [1, {min(rows, cols)}]")
    return TriFactor(QMatrix.eye(rows, rank), QMatrix.eye(rank, rank),
                     QMatrix.eye(rank, cols), rank)


def cqsvd_qqr_step(X: QMatrix, tf: TriFactor) -> TriFactor:
    """One alternating sweep of the QR tri-factorization.

    L comes from the first r columns of qqr(X R^H), R from the first r
    columns of qqr(X^H L) conjugate-transposed, and D is the conjugate
    transpose of the leading r x r block of that second triangular factor,
    so |D_ss| tracks the leading singular values of X.
    """
    r = tf.target_rank
    if tf.rfac.cols != X.cols or tf.l.rows != X.rows:
        raise ValueError("tri-factor dimensions do not match the matrix")
    ql = qqr(matmul(X, tf.rfac.H))
    l_new = QMatrix(ql.q.a[:, :r], ql.q.b[:, :r])
    qr2 = qqr(matmul_h(X, l_new))
    t_cols = QMatrix(qr2.q.a[:, :r], qr2.q.b[:, :r])
    r_new = t_cols.H
    s_block = QMatrix(qr2.r.a[:r, :r], qr2.r.b[:r, :r])
    d_new = s_block.H
    return TriFactor(l_new, d_new, r_new, r)


def cqsvd_qqr(X: QMatrix, rank, max_iter=200, tol=1e-12) -> TriFactor:
    """Iterate :func:`cqsvd_qqr_step` from the identity start until the
    vector of diagonal moduli changes by less than ``tol`` (max-abs)."""
    tf = tri_init(X.rows, X.cols, rank)
    prev = _diag_moduli(tf.d)
    for _ in range(max_iter):
        tf = cqsvd_qqr_step(X, tf)
        cur = _diag_moduli(tf.d)
        if np.max(np.abs(cur - prev)) < tol:
            break
        prev = cur
    return tf


def _diag_moduli(D: QMatrix) -> np.ndarray:
    idx = np.arange(min(D.rows, D.cols))
    return np.sqrt(np.abs(D.a[idx, idx]) ** 2 + np.abs(D.b[idx, idx]) ** 2)


def diag_moduli(D: QMatrix) -> np.ndarray:
    """Moduli of the diagonal entries."""
    return _diag_moduli(D)
