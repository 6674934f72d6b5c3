"""Quaternion scalars, dense quaternion matrices, and the equivalent complex
representation.

A quaternion q = w + x*i + y*j + z*k is kept internally in Cayley-Dickson
form as a pair of complex numbers (a, b) with q = a + b*j, a = w + x*i,
b = y + z*i.  Matrices store two contiguous complex planes so that every
matrix product maps onto plain complex BLAS calls; the four real component
planes stay available as zero-copy strided views.
"""

from __future__ import annotations

import math
import struct

import numpy as np

_QMAT_MAGIC = b"QMAT"
_QMAT_VERSION = 1


class Quaternion:
    """One quaternion scalar w + x*i + y*j + z*k (double precision)."""

    __slots__ = ("w", "x", "y", "z")

    def __init__(self, w=0.0, x=0.0, y=0.0, z=0.0):
        self.w = float(w)
        self.x = float(x)
        self.y = float(y)
        self.z = float(z)

    @classmethod
    def from_pair(cls, a, b):
        """Build from the Cayley-Dickson pair (a, b), q = a + b*j."""
        a = complex(a)
        b = complex(b)
        return cls(a.real, a.imag, b.real, b.imag)

    def to_pair(self):
        """Cayley-Dickson pair (w + x*i, y + z*i)."""
        return complex(self.w, self.x), complex(self.y, self.z)

    def conj(self):
        return Quaternion(self.w, -self.x, -self.y, -self.z)

    def modulus(self):
        return math.sqrt(self.w * self.w + self.x * self.x
                         + self.y * self.y + self.z * self.z)

    @property
    def is_pure(self):
        return self.w == 0.0

    def normalized(self):
        m = self.modulus()
        if m == 0.0:
            raise ZeroDivisionError("cannot normalize the zero quaternion")
        return self / m

    def __mul__(self, other):
        if isinstance(other, Quaternion):
            return qmul(self, other)
        if isinstance(other, (int, float)):
            s = float(other)
            return Quaternion(self.w * s, self.x * s, self.y * s, self.z * s)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, float)):
            s = float(other)
            return Quaternion(s * self.w, s * self.x, s * self.y, s * self.z)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w + other.w, self.x + other.x,
                              self.y + other.y, self.z + other.z)
        if isinstance(other, (int, float)):
            return Quaternion(self.w + other, self.x, self.y, self.z)
        return NotImplemented

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Quaternion):
            return Quaternion(self.w - other.w, self.x - other.x,
                              self.y - other.y, self.z - other.z)
        if isinstance(other, (int, float)):
            return Quaternion(self.w - other, self.x, self.y, self.z)
        return NotImplemented

    def __neg__(self):
        return Quaternion(-self.w, -self.x, -self.y, -self.z)

    def __truediv__(self, other):
        if isinstance(other, (int, float)):
            s = float(other)
            return Quaternion(self.w / s, self.x / s, self.y / s, self.z / s)
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, Quaternion):
            return (self.w, self.x, self.y, self.z) == (other.w, other.x,
                                                        other.y, other.z)
        if isinstance(other, (int, float)):
            return self == Quaternion(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.w, self.x, self.y, self.z))

    def __repr__(self):
        return f"Quaternion({self.w!r}, {self.x!r}, {self.y!r}, {self.z!r})"


def qmul(a: Quaternion, b: Quaternion) -> Quaternion:
    """Hamilton product a*b (non-commutative)."""
    return Quaternion(
        a.w * b.w - a.x * b.x - a.y * b.y - a.z * b.z,
        a.w * b.x + a.x * b.w + a.y * b.z - a.z * b.y,
        a.w * b.y - a.x * b.z + a.y * b.w + a.z * b.x,
        a.w * b.z + a.x * b.y - a.y * b.x + a.z * b.w,
    )


def modulus(q: Quaternion) -> float:
    """|q| = sqrt(w^2 + x^2 + y^2 + z^2)."""
    return q.modulus()


class QMatrix:
    """Dense M x N quaternion matrix.

    Stored as two C-contiguous complex128 planes ``a`` and ``b`` with
    Q = a + b*j.  The four real component planes (Q0..Q3 for the 1, i, j, k
    parts) are exposed through :meth:`plane` as zero-copy views.  Instances
    are treated as immutable by every operation in this package: all
    arithmetic returns fresh matrices.
    """

    __slots__ = ("a", "b")

    def __init__(self, a, b, copy=False):
        if copy:
            a = np.array(a, dtype=np.complex128, order="C")
            b = np.array(b, dtype=np.complex128, order="C")
        else:
            a = np.ascontiguousarray(a, dtype=np.complex128)
            b = np.ascontiguousarray(b, dtype=np.complex128)
        if a.ndim != 2 or a.shape != b.shape:
            raise ValueError(f"plane shapes differ: {a.shape} vs {b.shape}")
        self.a = a
        self.b = b

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, rows, cols):
        return cls(np.zeros((rows, cols), np.complex128),
                   np.zeros((rows, cols), np.complex128))

    @classmethod
    def eye(cls, rows, cols=None):
        cols = rows if cols is None else cols
        return cls(np.eye(rows, cols, dtype=np.complex128),
                   np.zeros((rows, cols), np.complex128))

    @classmethod
    def from_planes(cls, planes):
        """Build from an (M, N, 4) real array in (w, x, y, z) order."""
        planes = np.asarray(planes, dtype=np.float64)
        if planes.ndim != 3 or planes.shape[2] != 4:
            raise ValueError("expected an (M, N, 4) array")
        a = planes[:, :, 0] + 1j * planes[:, :, 1]
        b = planes[:, :, 2] + 1j * planes[:, :, 3]
        return cls(a, b)

    @classmethod
    def from_entries(cls, entries):
        """Build from a nested list of Quaternion or real scalars."""
        rows = len(entries)
        cols = len(entries[0])
        out = cls.zeros(rows, cols)
        for m, row in enumerate(entries):
            if len(row) != cols:
                raise ValueError("ragged rows")
            for n, q in enumerate(row):
                if not isinstance(q, Quaternion):
                    q = Quaternion(q)
                pa, pb = q.to_pair()
                out.a[m, n] = pa
                out.b[m, n] = pb
        return out

    # -- basic structure ---------------------------------------------------

    @property
    def shape(self):
        return self.a.shape

    @property
    def rows(self):
        return self.a.shape[0]

    @property
    def cols(self):
        return self.a.shape[1]

    def plane(self, index):
        """Real component plane 0..3 for the 1, i, j, k parts (a view)."""
        views = (self.a.real, self.a.imag, self.b.real, self.b.imag)
        return views[index]

    def to_planes(self):
        """(M, N, 4) real copy in (w, x, y, z) order."""
        return np.stack(
            (self.a.real, self.a.imag, self.b.real, self.b.imag), axis=-1)

    @property
    def is_pure(self):
        return not np.any(self.a.real)

    def entry(self, m, n) -> Quaternion:
        return Quaternion.from_pair(self.a[m, n], self.b[m, n])

    def copy(self):
        return QMatrix(self.a.copy(), self.b.copy())

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(self.a + other.a, self.b + other.b)
        return NotImplemented

    def __sub__(self, other):
        if isinstance(other, QMatrix):
            return QMatrix(self.a - other.a, self.b - other.b)
        return NotImplemented

    def __neg__(self):
        return QMatrix(-self.a, -self.b)

    def __mul__(self, scalar):
        if isinstance(scalar, (int, float)):
            return QMatrix(self.a * scalar, self.b * scalar)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        if isinstance(scalar, (int, float)):
            return QMatrix(self.a / scalar, self.b / scalar)
        return NotImplemented

    def __matmul__(self, other):
        if isinstance(other, QMatrix):
            return matmul(self, other)
        return NotImplemented

    @property
    def H(self):
        """Conjugate transpose."""
        return conj_transpose(self)

    def frobenius_norm(self):
        return frobenius_norm(self)

    def __repr__(self):
        return f"QMatrix(shape={self.shape})"


def matmul(A: QMatrix, B: QMatrix) -> QMatrix:
    """Quaternion matrix product via four complex GEMMs.

    With A = Aa + Ab*j and B = Ba + Bb*j,
    AB = (Aa Ba - Ab conj(Bb)) + (Aa Bb + Ab conj(Ba)) j.
    """
    if A.cols != B.rows:
        raise ValueError(f"dimension mismatch: {A.shape} @ {B.shape}")
    ba_c = B.a.conj()
    bb_c = B.b.conj()
    return QMatrix(A.a @ B.a - A.b @ bb_c, A.a @ B.b + A.b @ ba_c)


def matmul_h(A: QMatrix, B: QMatrix) -> QMatrix:
    """Compute A^H @ B without materializing the conjugate transpose of A.

    Only the planes of B (and the small results) get conjugated, so the
    large operand feeds BLAS as a plain transposed view.
    """
    if A.rows != B.rows:
        raise ValueError(f"dimension mismatch: {A.shape}^H @ {B.shape}")
    at = A.a.T
    bt = A.b.T
    ba_c = B.a.conj()
    bb_c = B.b.conj()
    out_a = (at @ ba_c).conj() + bt @ bb_c
    out_b = (at @ bb_c).conj() - bt @ ba_c
    return QMatrix(out_a, out_b)


def conj_transpose(A: QMatrix) -> QMatrix:
    """A^H with (A^H)_{nm} = conj(A_{mn})."""
    return QMatrix(A.a.conj().T, -A.b.T, copy=True)


def frobenius_norm(A: QMatrix) -> float:
    nsq = np.vdot(A.a, A.a).real + np.vdot(A.b, A.b).real
    return math.sqrt(nsq)


def column_norms(A: QMatrix) -> np.ndarray:
    """Euclidean norm of each column's quaternion moduli (length N)."""
    sq = np.abs(A.a) ** 2 + np.abs(A.b) ** 2
    return np.sqrt(sq.sum(axis=0))


def l21_norm(A: QMatrix) -> float:
    """Sum over columns of the column modulus norms."""
    return float(column_norms(A).sum())


def l1_norm(A: QMatrix) -> float:
    """Sum of all entry moduli."""
    return float(np.sqrt(np.abs(A.a) ** 2 + np.abs(A.b) ** 2).sum())


def entry_moduli(A: QMatrix) -> np.ndarray:
    """(M, N) array of entry moduli."""
    return np.sqrt(np.abs(A.a) ** 2 + np.abs(A.b) ** 2)


def scale_columns(A: QMatrix, factors) -> QMatrix:
    """Multiply column n by the real scalar factors[n]."""
    f = np.asarray(factors, dtype=np.float64)
    if f.shape != (A.cols,):
        raise ValueError(f"expected {A.cols} factors, got {f.shape}")
    return QMatrix(A.a * f, A.b * f)


def left_scalar_mul(q: Quaternion, A: QMatrix) -> QMatrix:
    """Entrywise left multiplication q * A."""
    sa, sb = q.to_pair()
    return QMatrix(sa * A.a - sb * A.b.conj(), sa * A.b + sb * A.a.conj())


def right_scalar_mul(A: QMatrix, q: Quaternion) -> QMatrix:
    """Entrywise right multiplication A * q."""
    sa, sb = q.to_pair()
    return QMatrix(A.a * sa - A.b * sb.conjugate(),
                   A.a * sb + A.b * sa.conjugate())


def to_equivalent_complex(Q: QMatrix) -> np.ndarray:
    """2M x 2N complex block matrix [[Qa, Qb], [-conj(Qb), conj(Qa)]].

    The map is a real-algebra homomorphism: chi(AB) = chi(A) chi(B).
    """
    return np.block([[Q.a, Q.b], [-Q.b.conj(), Q.a.conj()]])


def from_equivalent_complex(C, tol=1e-10) -> QMatrix:
    """Invert :func:`to_equivalent_complex`.

    The input must have even dimensions and satisfy the block symmetry
    [[A, B], [-conj(B), conj(A)]] within ``tol`` relative to its Frobenius
    norm; violations raise ValueError.
    """
    C = np.asarray(C, dtype=np.complex128)
    if C.ndim != 2 or C.shape[0] % 2 or C.shape[1] % 2:
        raise ValueError(f"expected even dimensions, got {C.shape}")
    m = C.shape[0] // 2
    n = C.shape[1] // 2
    a = C[:m, :n]
    b = C[:m, n:]
    scale = np.linalg.norm(C)
    err = math.hypot(np.linalg.norm(C[m:, :n] + b.conj()),
                     np.linalg.norm(C[m:, n:] - a.conj()))
    if err > tol * max(scale, 1e-300):
        raise ValueError(
            f"block symmetry violated: residual {err:.3e} > {tol:.1e} relative")
    return QMatrix(a, b, copy=True)


def save_qmat(path, Q: QMatrix) -> None:
    """Write the QMAT binary format.

    Layout: magic b"QMAT", u8 version=1, u32 little-endian row and column
    counts, then M*N*4 little-endian float64 in row-major (w, x, y, z) order.
    """
    header = _QMAT_MAGIC + struct.pack("<BII", _QMAT_VERSION, Q.rows, Q.cols)
    payload = np.ascontiguousarray(Q.to_planes(), dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes())


def load_qmat(path) -> QMatrix:
    """Read the QMAT binary format; rejects wrong magic or version."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 13 or raw[:4] != _QMAT_MAGIC:
        raise ValueError(f"{path}: not a QMAT file")
    version, rows, cols = struct.unpack("<BII", raw[4:13])
    if version != _QMAT_VERSION:
        raise ValueError(f"{path}: unsupported QMAT version {version}")
    expected = 13 + rows * cols * 4 * 8
    if len(raw) != expected:
        raise ValueError(f"{path}: truncated QMAT payload")
    planes = np.frombuffer(raw, dtype="<f8", offset=13).reshape(rows, cols, 4)
    return QMatrix.from_planes(planes)
