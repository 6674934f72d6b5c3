"""Left-handed quaternion discrete cosine transform and its inverse.

The forward transform splits the input into Cayley-Dickson parts, applies
an orthonormal 2-D DCT-II to each complex part, reassembles, and finally
left-multiplies every entry by a pure unit quaternion (the
"quaternionization" axis).  Because that axis squares to -1, the inverse
applies the negated axis on the left and then the inverse DCT.  Both
directions preserve the Frobenius norm.
"""

from __future__ import annotations

from dataclasses import dataclass

import scipy.fft

from .quaternion import QMatrix, Quaternion, left_scalar_mul

_AXIS_TOL = 1e-12


def default_axis() -> Quaternion:
    """The (i + j + k)/sqrt(3) luminance axis used unless overridden."""
    s = 3.0 ** -0.5
    return Quaternion(0.0, s, s, s)


@dataclass(frozen=True)
class QdctContext:
    """Transform axis plus the matrix dimensions it applies to.

    The factor must be a pure quaternion of unit modulus (hence its square
    is -1); anything else raises ValueError.
    """
    factor: Quaternion
    rows: int
    cols: int

    def __post_init__(self):
        if abs(self.factor.w) > _AXIS_TOL:
            raise ValueError("quaternionization factor must be pure")
        if abs(self.factor.modulus() - 1.0) > _AXIS_TOL:
            raise ValueError("quaternionization factor must have unit modulus")

    def _check(self, A: QMatrix):
        if A.shape != (self.rows, self.cols):
            raise ValueError(
                f"matrix shape {A.shape} does not match context "
                f"({self.rows}, {self.cols})")


def fqdct_l(ctx: QdctContext, A: QMatrix) -> QMatrix:
    """Forward left-handed QDCT."""
    ctx._check(A)
    fa = scipy.fft.dctn(A.a, type=2, norm="ortho")
    fb = scipy.fft.dctn(A.b, type=2, norm="ortho")
    return left_scalar_mul(ctx.factor, QMatrix(fa, fb))


def iqdct_l(ctx: QdctContext, B: QMatrix) -> QMatrix:
    """Inverse left-handed QDCT (exact inverse of :func:`fqdct_l`)."""
    ctx._check(B)
    g = left_scalar_mul(-ctx.factor, B)
    ga = scipy.fft.idctn(g.a, type=2, norm="ortho")
    gb = scipy.fft.idctn(g.b, type=2, norm="ortho")
    return QMatrix(ga, gb)
