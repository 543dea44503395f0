"""PNG / PPM image I/O. Images are float32 (3, h, w) arrays in [0, 1]."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image as PILImage

FLOAT = np.float32


def to_uint8(img: np.ndarray) -> np.ndarray:
    """(3, h, w) floats in [0,1] -> (h, w, 3) uint8."""
    arr = np.round(np.clip(img, 0.0, 1.0).astype(np.float64) * 255.0).astype(np.uint8)
    return arr.transpose(1, 2, 0)


def from_uint8(arr: np.ndarray) -> np.ndarray:
    """(h, w, 3) uint8 -> (3, h, w) floats in [0,1]."""
    return (arr.astype(np.float64) / 255.0).astype(FLOAT).transpose(2, 0, 1)


def _from_pil(im: PILImage.Image) -> np.ndarray:
    if im.mode != "RGB":
        im = im.convert("RGB")
    return from_uint8(np.asarray(im, dtype=np.uint8))


def load_image(path: str | Path) -> np.ndarray:
    with PILImage.open(path) as im:
        return _from_pil(im)


def decode_image(data: bytes) -> np.ndarray:
    with PILImage.open(io.BytesIO(data)) as im:
        return _from_pil(im)


def encode_png(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    PILImage.fromarray(to_uint8(img), mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def save_image(img: np.ndarray, path: str | Path) -> None:
    """Writes 8-bit RGB; the suffix picks the format (.png or .ppm P6)."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in (".png", ".ppm"):
        raise ValueError(f"unsupported image format {suffix!r} (use .png or .ppm)")
    pil = PILImage.fromarray(to_uint8(img), mode="RGB")
    pil.save(path, format="PNG" if suffix == ".png" else "PPM")
