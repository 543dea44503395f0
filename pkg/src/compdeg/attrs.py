"""Normalized degradation-attribute maps and their encodings.

A map is a float32 array of shape (3, h, w). Channel 0 carries the blur
strength, channel 1 the noise strength, channel 2 the JPEG strength; on
screen the channels render as red, green and blue respectively.

Encodings: blur sigma maps to sigma/3.5, noise lam to lam/55, and JPEG
quality q to 0.9*(100-q)/100 + 0.1 when compression was applied (0 when
not). The 0.1 offset keeps "compressed at q=100" distinguishable from
"never compressed".
"""

from __future__ import annotations

import numpy as np

from .degrade import LAMBDA_MAX, Q_MAX, Q_MIN, SIGMA_MAX, DegradationSpec

FLOAT = np.float32

N_CHANNELS = 3
CHANNEL_BLUR = 0
CHANNEL_NOISE = 1
CHANNEL_JPEG = 2
CHANNEL_NAMES = ("blur", "noise", "jpeg")
DISPLAY_COLORS = {"blur": "red", "noise": "green", "jpeg": "blue"}

# Below this value a decoded JPEG channel counts as "not compressed"
# (midpoint of the gap between 0 and the q=100 encoding 0.1).
JPEG_OFF_THRESHOLD = 0.05


def encode_spec(spec: DegradationSpec) -> tuple[float, float, float]:
    v_b = spec.sigma / SIGMA_MAX
    v_n = spec.lam / LAMBDA_MAX
    v_c = 0.9 * (100 - spec.q) / 100.0 + 0.1 if spec.jpeg_applied else 0.0
    return (v_b, v_n, v_c)


def decode_attrs(v_b: float, v_n: float, v_c: float) -> DegradationSpec:
    """Inverse of encode_spec; inputs are clamped to [0, 1] first."""
    v_b = min(max(float(v_b), 0.0), 1.0)
    v_n = min(max(float(v_n), 0.0), 1.0)
    v_c = min(max(float(v_c), 0.0), 1.0)
    if v_c < JPEG_OFF_THRESHOLD:
        return DegradationSpec(sigma=SIGMA_MAX * v_b, lam=LAMBDA_MAX * v_n, jpeg_applied=False)
    q = round(100.0 - (v_c - 0.1) * 100.0 / 0.9)
    q = min(max(q, Q_MIN), Q_MAX)
    return DegradationSpec(sigma=SIGMA_MAX * v_b, lam=LAMBDA_MAX * v_n, q=q, jpeg_applied=True)


def constant_map(spec: DegradationSpec, h: int, w: int) -> np.ndarray:
    if h < 1 or w < 1:
        raise ValueError(f"map size must be at least 1x1, got {h}x{w}")
    values = encode_spec(spec)
    out = np.empty((N_CHANNELS, h, w), dtype=FLOAT)
    for c in range(N_CHANNELS):
        out[c] = values[c]
    return out


def map_rmse(est: np.ndarray, truth: np.ndarray) -> tuple[float, float, float]:
    """Per-channel root mean squared error over all pixels."""
    if est.shape != truth.shape:
        raise ValueError(f"map shape {est.shape} does not match truth shape {truth.shape}")
    diff = est.astype(np.float64) - truth.astype(np.float64)
    per_channel = np.sqrt(np.mean(diff * diff, axis=(1, 2)))
    return tuple(float(v) for v in per_channel)


def map_to_image(m: np.ndarray) -> np.ndarray:
    """Map as a displayable image: channels clamped and put on the 8-bit lattice."""
    clamped = np.clip(m, 0.0, 1.0)
    return (np.round(clamped.astype(np.float64) * 255.0) / 255.0).astype(FLOAT)


def image_to_map(img: np.ndarray) -> np.ndarray:
    if img.ndim != 3 or img.shape[0] != N_CHANNELS:
        raise ValueError(f"expected a (3, h, w) image, got {img.shape}")
    return img.astype(FLOAT).copy()
