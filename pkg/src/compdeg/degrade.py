"""Compositional degradation chain: Gaussian blur, AWGN, 8-bit quantization, JPEG.

Stages are applied in that fixed order. Images are float32 arrays of shape
(3, h, w) with values in [0, 1]; the noise level lam is expressed on the
0-255 intensity scale, so the internal standard deviation is lam / 255.

The JPEG stage simulates baseline JPEG loss exactly (color transform, 8x8
type-II DCT, quantization-table round trip) but never emits a bitstream:
entropy coding is lossless, so pixels come out identical without it.
Chroma is kept at full resolution (4:4:4) so per-pixel attribute maps stay
spatially aligned with the image.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

FLOAT = np.float32

SIGMA_MAX = 3.5
LAMBDA_MAX = 55.0
Q_MIN = 5
Q_MAX = 100


@dataclass(frozen=True)
class DegradationSpec:
    """One sample's degradation parameters (blur sigma, noise lam, JPEG q)."""

    sigma: float = 0.0
    lam: float = 0.0
    q: int = 100
    jpeg_applied: bool = False

    def __post_init__(self):
        if not 0.0 <= self.sigma <= SIGMA_MAX:
            raise ValueError(f"sigma must be in [0, {SIGMA_MAX}], got {self.sigma}")
        if not 0.0 <= self.lam <= LAMBDA_MAX:
            raise ValueError(f"lambda must be in [0, {LAMBDA_MAX}], got {self.lam}")
        if self.jpeg_applied and not Q_MIN <= self.q <= Q_MAX:
            raise ValueError(f"q must be in [{Q_MIN}, {Q_MAX}], got {self.q}")


def _check_image(img: np.ndarray) -> None:
    if img.ndim != 3 or img.shape[0] != 3:
        raise ValueError(f"image must be (3, h, w), got shape {img.shape}")
    if img.shape[1] < 1 or img.shape[2] < 1:
        raise ValueError(f"image smaller than 1x1: {img.shape}")


def gaussian_kernel(sigma: float) -> np.ndarray:
    """Normalized 2-D Gaussian truncated at radius ceil(3*sigma), float64.

    sigma below 1e-6 yields the 1x1 delta kernel.
    """
    if not 0.0 <= sigma <= SIGMA_MAX:
        raise ValueError(f"sigma must be in [0, {SIGMA_MAX}], got {sigma}")
    if sigma < 1e-6:
        return np.ones((1, 1), dtype=np.float64)
    r = math.ceil(3.0 * sigma)
    coords = np.arange(-r, r + 1, dtype=np.float64)
    dy, dx = np.meshgrid(coords, coords, indexing="ij")
    k = np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
    return k / k.sum()


def apply_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Per-channel convolution with gaussian_kernel(sigma), edge replication."""
    _check_image(img)
    kernel = gaussian_kernel(sigma)
    if kernel.shape == (1, 1):
        return img.copy()
    r = kernel.shape[0] // 2
    _, h, w = img.shape
    padded = np.pad(img.astype(np.float64), ((0, 0), (r, r), (r, r)), mode="edge")
    out = np.zeros((3, h, w), dtype=np.float64)
    for ki in range(kernel.shape[0]):
        for kj in range(kernel.shape[1]):
            out += kernel[ki, kj] * padded[:, ki : ki + h, kj : kj + w]
    return np.clip(out, 0.0, 1.0).astype(FLOAT)


def apply_awgn(img: np.ndarray, lam: float, seed: int) -> np.ndarray:
    """Adds i.i.d. Gaussian noise with std lam/255, clamps to [0, 1]."""
    _check_image(img)
    if not 0.0 <= lam <= LAMBDA_MAX:
        raise ValueError(f"lambda must be in [0, {LAMBDA_MAX}], got {lam}")
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, lam / 255.0, size=img.shape)
    return np.clip(img.astype(np.float64) + noise, 0.0, 1.0).astype(FLOAT)


def quantize_8bit(img: np.ndarray) -> np.ndarray:
    """Snaps values onto the 256-level lattice k/255."""
    _check_image(img)
    return (np.round(img.astype(np.float64) * 255.0) / 255.0).astype(FLOAT)


# ITU T.81 Annex K base quantization tables, natural (row-major) order.
LUMA_BASE = np.array(
    [
        [16, 11, 10, 16, 24, 40, 51, 61],
        [12, 12, 14, 19, 26, 58, 60, 55],
        [14, 13, 16, 24, 40, 57, 69, 56],
        [14, 17, 22, 29, 51, 87, 80, 62],
        [18, 22, 37, 56, 68, 109, 103, 77],
        [24, 35, 55, 64, 81, 104, 113, 92],
        [49, 64, 78, 87, 103, 121, 120, 101],
        [72, 92, 95, 98, 112, 100, 103, 99],
    ],
    dtype=np.int64,
)
CHROMA_BASE = np.array(
    [
        [17, 18, 24, 47, 99, 99, 99, 99],
        [18, 21, 26, 66, 99, 99, 99, 99],
        [24, 26, 56, 99, 99, 99, 99, 99],
        [47, 66, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
        [99, 99, 99, 99, 99, 99, 99, 99],
    ],
    dtype=np.int64,
)


def jpeg_quant_tables(q: int) -> tuple[np.ndarray, np.ndarray]:
    """Annex-K tables scaled by the conventional quality law (IJG integer math)."""
    if not isinstance(q, (int, np.integer)) or not 1 <= q <= 100:
        raise ValueError(f"q must be an integer in [1, 100], got {q!r}")
    s = 5000 // q if q < 50 else 200 - 2 * q
    luma = np.clip((LUMA_BASE * s + 50) // 100, 1, 255)
    chroma = np.clip((CHROMA_BASE * s + 50) // 100, 1, 255)
    return luma, chroma


# Orthonormal 8x8 type-II DCT matrix; DCT2(x) = D x D^T matches the JPEG FDCT.
def _dct_matrix() -> np.ndarray:
    n = np.arange(8, dtype=np.float64)
    d = np.cos((2 * n[None, :] + 1) * n[:, None] * np.pi / 16.0) * np.sqrt(2.0 / 8.0)
    d[0, :] = np.sqrt(1.0 / 8.0)
    return d


DCT8 = _dct_matrix()

# BT.601 full-range RGB <-> YCbCr on the 0-255 scale.
_RGB_TO_YCC = np.array(
    [
        [0.299, 0.587, 0.114],
        [-0.168736, -0.331264, 0.5],
        [0.5, -0.418688, -0.081312],
    ]
)
_YCC_TO_RGB = np.array(
    [
        [1.0, 0.0, 1.402],
        [1.0, -0.344136, -0.714136],
        [1.0, 1.772, 0.0],
    ]
)


def _blockify(plane: np.ndarray) -> np.ndarray:
    hb, wb = plane.shape[0] // 8, plane.shape[1] // 8
    return plane.reshape(hb, 8, wb, 8).transpose(0, 2, 1, 3).reshape(hb * wb, 8, 8)


def _unblockify(blocks: np.ndarray, h: int, w: int) -> np.ndarray:
    hb, wb = h // 8, w // 8
    return blocks.reshape(hb, wb, 8, 8).transpose(0, 2, 1, 3).reshape(h, w)


def apply_jpeg(img: np.ndarray, q: int) -> np.ndarray:
    """Baseline JPEG round trip at quality q (no bitstream, 4:4:4 chroma)."""
    _check_image(img)
    if not Q_MIN <= q <= Q_MAX:
        raise ValueError(f"q must be in [{Q_MIN}, {Q_MAX}], got {q}")
    _, h, w = img.shape
    levels = np.round(img.astype(np.float64) * 255.0)
    ycc = np.einsum("ij,jhw->ihw", _RGB_TO_YCC, levels)
    ycc[1:] += 128.0

    pad_h = (-h) % 8
    pad_w = (-w) % 8
    ycc = np.pad(ycc, ((0, 0), (0, pad_h), (0, pad_w)), mode="edge")
    hp, wp = h + pad_h, w + pad_w

    luma, chroma = jpeg_quant_tables(q)
    tables = (luma.astype(np.float64), chroma.astype(np.float64), chroma.astype(np.float64))
    rec = np.empty_like(ycc)
    for c in range(3):
        blocks = _blockify(ycc[c] - 128.0)
        coeffs = np.einsum("ij,njk,lk->nil", DCT8, blocks, DCT8)
        coeffs = np.round(coeffs / tables[c]) * tables[c]
        rec_blocks = np.einsum("ji,njk,kl->nil", DCT8, coeffs, DCT8)
        rec[c] = _unblockify(rec_blocks, hp, wp) + 128.0

    rec = rec[:, :h, :w]
    rec[1:] -= 128.0
    rgb = np.einsum("ij,jhw->ihw", _YCC_TO_RGB, rec)
    return np.clip(rgb / 255.0, 0.0, 1.0).astype(FLOAT)


def degrade(img: np.ndarray, spec: DegradationSpec, seed: int) -> np.ndarray:
    """Blur, then AWGN, then 8-bit quantization, then JPEG iff spec says so."""
    out = apply_blur(img, spec.sigma)
    out = apply_awgn(out, spec.lam, seed)
    out = quantize_8bit(out)
    if spec.jpeg_applied:
        out = apply_jpeg(out, spec.q)
    return out
