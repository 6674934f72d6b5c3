"""Color image codec, mask generation, PSNR/SSIM metrics, and the PNG and
QMSK external formats.

Pixels stay on the 8-bit [0, 255] scale throughout so the solver defaults
apply unchanged.  A color image maps to a pure quaternion matrix with the
R, G, B channels on the i, j, k components.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np
from PIL import Image
from scipy.signal import convolve2d

from .quaternion import QMatrix
from .solvers import Mask

_QMSK_MAGIC = b"QMSK"
_QMSK_VERSION = 1

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03
_PEAK = 255.0


@dataclass
class ColorImage:
    """Real-valued RGB raster, channel-last (H, W, 3), values in [0, 255]."""
    data: np.ndarray

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ValueError("expected an (H, W, 3) array")

    @property
    def height(self):
        return self.data.shape[0]

    @property
    def width(self):
        return self.data.shape[1]


@dataclass
class QualityReport:
    """PSNR (dB, +inf for identical inputs) and mean SSIM in [-1, 1]."""
    psnr_db: float
    ssim: float


def image_to_quaternion(img: ColorImage) -> QMatrix:
    """Pure quaternion encoding: R, G, B on the i, j, k components."""
    d = img.data
    return QMatrix(1j * d[:, :, 0], d[:, :, 1] + 1j * d[:, :, 2])


def quaternion_to_image(Q: QMatrix) -> ColorImage:
    """Decode by clamping the imaginary parts to [0, 255]; any real-part
    residue a solver leaves behind is discarded."""
    out = np.stack((Q.a.imag, Q.b.real, Q.b.imag), axis=-1)
    return ColorImage(np.clip(out, 0.0, _PEAK))


def random_mask(rows, cols, missing_ratio, seed) -> Mask:
    """Drop exactly round(missing_ratio * rows * cols) entries, chosen
    uniformly without replacement by a seeded generator.  A dropped entry
    removes the whole quaternion (all channels at once)."""
    if not 0.0 <= missing_ratio <= 1.0:
        raise ValueError("missing ratio must lie in [0, 1]")
    n_missing = round(missing_ratio * rows * cols)
    rng = np.random.default_rng(seed)
    observed = np.ones(rows * cols, dtype=bool)
    if n_missing:
        drop = rng.choice(rows * cols, size=n_missing, replace=False)
        observed[drop] = False
    return Mask(observed.reshape(rows, cols))


def psnr(ref: ColorImage, test: ColorImage) -> float:
    """10 log10(255^2 / MSE) over all pixels and channels; identical
    inputs return +infinity."""
    if ref.data.shape != test.data.shape:
        raise ValueError("image dimensions differ")
    mse = float(np.mean((ref.data - test.data) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(_PEAK * _PEAK / mse)


def _gaussian_window(size, sigma):
    half = (size - 1) / 2.0
    coords = np.arange(size) - half
    g = np.exp(-(coords ** 2) / (2.0 * sigma * sigma))
    kernel = np.outer(g, g)
    return kernel / kernel.sum()


def _ssim_channel(x, y, kernel, c1, c2):
    mu_x = convolve2d(x, kernel, mode="valid")
    mu_y = convolve2d(y, kernel, mode="valid")
    xx = convolve2d(x * x, kernel, mode="valid") - mu_x * mu_x
    yy = convolve2d(y * y, kernel, mode="valid") - mu_y * mu_y
    xy = convolve2d(x * y, kernel, mode="valid") - mu_x * mu_y
    num = (2.0 * mu_x * mu_y + c1) * (2.0 * xy + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (xx + yy + c2)
    return float(np.mean(num / den))


def ssim(ref: ColorImage, test: ColorImage) -> float:
    """Mean structural similarity with an 11 x 11 Gaussian window
    (sigma 1.5), K1 = 0.01, K2 = 0.03, L = 255, averaged over the three
    channels.  Only full windows contribute (valid convolution)."""
    if ref.data.shape != test.data.shape:
        raise ValueError("image dimensions differ")
    if min(ref.height, ref.width) < _SSIM_WINDOW:
        raise ValueError(f"image smaller than the {_SSIM_WINDOW}-pixel window")
    kernel = _gaussian_window(_SSIM_WINDOW, _SSIM_SIGMA)
    c1 = (_SSIM_K1 * _PEAK) ** 2
    c2 = (_SSIM_K2 * _PEAK) ** 2
    vals = [_ssim_channel(ref.data[:, :, c], test.data[:, :, c],
                          kernel, c1, c2) for c in range(3)]
    return float(np.mean(vals))


def quality_report(ref: ColorImage, test: ColorImage) -> QualityReport:
    """Bundle both metrics for one image pair."""
    return QualityReport(psnr_db=psnr(ref, test), ssim=ssim(ref, test))


# -- PNG ---------------------------------------------------------------


def load_png(path) -> ColorImage:
    """Read an 8-bit RGB PNG; images with an alpha channel are rejected."""
    with Image.open(path) as im:
        if im.mode in ("RGBA", "LA", "PA"):
            raise ValueError(f"{path}: alpha channels are not supported")
        if im.mode == "P" and "transparency" in im.info:
            raise ValueError(f"{path}: alpha channels are not supported")
        if im.mode != "RGB":
            raise ValueError(f"{path}: expected an RGB image, got {im.mode}")
        data = np.asarray(im, dtype=np.float64)
    return ColorImage(data)


def save_png(path, img: ColorImage) -> None:
    """Write an 8-bit RGB PNG (values rounded and clamped)."""
    data = np.clip(np.rint(img.data), 0, 255).astype(np.uint8)
    Image.fromarray(data, mode="RGB").save(path, format="PNG")


def save_mask_png(path, mask: Mask) -> None:
    """Single-channel mask image: 255 = observed, 0 = missing."""
    data = np.where(mask.observed, 255, 0).astype(np.uint8)
    Image.fromarray(data, mode="L").save(path, format="PNG")


def load_mask_png(path) -> Mask:
    """Read a mask PNG; every pixel must be exactly 0 or 255."""
    with Image.open(path) as im:
        if im.mode != "L":
            raise ValueError(f"{path}: expected a single-channel mask PNG")
        data = np.asarray(im, dtype=np.uint8)
    if not np.all((data == 0) | (data == 255)):
        raise ValueError(f"{path}: mask pixels must be 0 or 255")
    return Mask(data == 255)


# -- QMSK binary mask ----------------------------------------------------


def save_qmsk(path, mask: Mask) -> None:
    """QMSK format: magic b"QMSK", u8 version=1, u32 little-endian row and
    column counts, then row-major bit-packed booleans (MSB first)."""
    header = _QMSK_MAGIC + struct.pack("<BII", _QMSK_VERSION,
                                       mask.rows, mask.cols)
    bits = np.packbits(mask.observed.reshape(-1))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(bits.tobytes())


def load_qmsk(path) -> Mask:
    """Read the QMSK format; rejects wrong magic or version."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 13 or raw[:4] != _QMSK_MAGIC:
        raise ValueError(f"{path}: not a QMSK file")
    version, rows, cols = struct.unpack("<BII", raw[4:13])
    if version != _QMSK_VERSION:
        raise ValueError(f"{path}: unsupported QMSK version {version}")
    n_bytes = (rows * cols + 7) // 8
    if len(raw) != 13 + n_bytes:
        raise ValueError(f"{path}: truncated QMSK payload")
    bits = np.unpackbits(np.frombuffer(raw, dtype=np.uint8, offset=13),
                         count=rows * cols)
    return Mask(bits.astype(bool).reshape(rows, cols))
