"""Quaternion low-rank matrix completion for color-image inpainting."""

from .quaternion import (
    QMatrix,
    Quaternion,
    column_norms,
    conj_transpose,
    entry_moduli,
    frobenius_norm,
    from_equivalent_complex,
    l1_norm,
    l21_norm,
    left_scalar_mul,
    load_qmat,
    matmul,
    matmul_h,
    modulus,
    qmul,
    right_scalar_mul,
    save_qmat,
    scale_columns,
    to_equivalent_complex,
)
from .linalg import (
    QqrResult,
    QsvdResult,
    TriFactor,
    cqsvd_qqr,
    cqsvd_qqr_step,
    diag_moduli,
    nuclear_norm,
    qqr,
    qsvd,
    tri_init,
)
from .qdct import QdctContext, default_axis, fqdct_l, iqdct_l
from .prox import (
    ColumnShrinkage,
    l21_prox,
    qsvt_prox,
    soft_threshold_elementwise,
    weighted_l21_prox,
    weighted_qsvt_prox,
)
from .solvers import (
    METHOD_IRQLNM_QQR,
    METHOD_QLNM_QQR,
    METHOD_QLNM_QQR_SR,
    METHODS,
    RANK_PRESETS_256,
    IterationStats,
    Mask,
    SolverConfig,
    SolverReport,
    WeightSchedule,
    complete,
    irqlnm_qqr_complete,
    make_weight_schedule,
    qlnm_qqr_complete,
    qlnm_qqr_sr_complete,
)
from .imaging import (
    ColorImage,
    QualityReport,
    image_to_quaternion,
    load_mask_png,
    load_png,
    load_qmsk,
    psnr,
    quality_report,
    quaternion_to_image,
    random_mask,
    save_mask_png,
    save_png,
    save_qmsk,
    ssim,
)
from .synth import gaussian, random_lowrank, random_qdct_sparse_lowrank

__version__ = "0.1.0"
