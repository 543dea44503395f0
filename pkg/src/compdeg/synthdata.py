"""Deterministic synthetic RGB images for desk-scale experiments.

No standard photo corpus ships with the package, so experiments and tests
render their own. The content is chosen to carry the cues the estimator
relies on without mimicking the degradations themselves: sharp-edged shapes
and thin lines (blur cue), band-limited gratings and smooth fields (clean
texture that no reasonable net confuses with white noise — every grating
period stays >= 6 px), and nothing blocky on an 8-pixel grid that could pass
for JPEG artifacts.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import imgio

FLOAT = np.float32


def _smooth_field(rng: np.random.Generator, h: int, w: int, cells: int) -> np.ndarray:
    """Bilinear interpolation of a coarse random grid; smooth, blob-like."""
    grid = rng.uniform(-1.0, 1.0, size=(cells + 1, cells + 1))
    ys = np.linspace(0, cells, h)
    xs = np.linspace(0, cells, w)
    y0 = np.minimum(ys.astype(int), cells - 1)
    x0 = np.minimum(xs.astype(int), cells - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    g00 = grid[np.ix_(y0, x0)]
    g01 = grid[np.ix_(y0, x0 + 1)]
    g10 = grid[np.ix_(y0 + 1, x0)]
    g11 = grid[np.ix_(y0 + 1, x0 + 1)]
    return (1 - fy) * ((1 - fx) * g00 + fx * g01) + fy * ((1 - fx) * g10 + fx * g11)


def synth_image(rng: np.random.Generator, h: int, w: int) -> np.ndarray:
    yy, xx = np.meshgrid(
        np.linspace(0.0, 1.0, h), np.linspace(0.0, 1.0, w), indexing="ij"
    )
    img = np.zeros((3, h, w), dtype=np.float64)

    # smooth colored background
    for c in range(3):
        img[c] = 0.5 + 0.25 * _smooth_field(rng, h, w, 3) + 0.15 * _smooth_field(rng, h, w, 6)

    # solid shapes with sharp edges
    for _ in range(int(rng.integers(6, 12))):
        cy, cx = rng.uniform(0.0, 1.0, 2)
        ry, rx = rng.uniform(0.05, 0.3, 2)
        if rng.random() < 0.5:
            mask = ((yy - cy) / ry) ** 2 + ((xx - cx) / rx) ** 2 < 1.0
        else:
            theta = rng.uniform(0, np.pi)
            u = np.cos(theta) * (xx - cx) + np.sin(theta) * (yy - cy)
            v = -np.sin(theta) * (xx - cx) + np.cos(theta) * (yy - cy)
            mask = (np.abs(u) < rx) & (np.abs(v) < ry)
        color = rng.uniform(0.05, 0.95, 3)
        alpha = rng.uniform(0.7, 1.0)
        img[:, mask] = (1 - alpha) * img[:, mask] + alpha * color[:, None]

    # band-limited gratings: period >= 6 px so texture never reads as noise
    for _ in range(int(rng.integers(2, 5))):
        cy, cx = rng.uniform(0.1, 0.9, 2)
        ry, rx = rng.uniform(0.15, 0.45, 2)
        mask = (np.abs(yy - cy) < ry) & (np.abs(xx - cx) < rx)
        period_px = rng.uniform(6.0, 16.0)
        theta = rng.uniform(0.0, np.pi)
        phase = rng.uniform(0.0, 2 * np.pi)
        coord = np.cos(theta) * xx * w + np.sin(theta) * yy * h
        wave = np.sin(2 * np.pi * coord / period_px + phase)
        amp = rng.uniform(0.1, 0.3)
        img[int(rng.integers(0, 3))][mask] += amp * wave[mask]

    # thin dark/light lines: a strong, localized blur cue
    for _ in range(int(rng.integers(3, 7))):
        x0, y0 = rng.uniform(0.05, 0.95, 2)
        angle = rng.uniform(0, np.pi)
        length = rng.uniform(0.2, 0.8)
        thickness = rng.uniform(0.8, 2.0)  # px
        dx, dy = np.cos(angle), np.sin(angle)
        dist = np.abs(-dy * (xx - x0) * w + dx * (yy - y0) * h)
        along = dx * (xx - x0) * w + dy * (yy - y0) * h
        mask = (dist < thickness) & (np.abs(along) < length * min(h, w) / 2)
        shade = rng.choice([0.05, 0.95])
        img[:, mask] = shade

    # faint correlated micro-texture so flat regions are never sterile;
    # amplitude ~2 intensity levels, spatially smooth, nothing like AWGN
    for c in range(3):
        img[c] += 0.008 * _smooth_field(rng, h, w, max(min(h, w) // 3, 2))

    return np.clip(img, 0.0, 1.0).astype(FLOAT)


def synth_dataset(count: int, h: int, w: int, seed: int) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [synth_image(rng, h, w) for _ in range(count)]


def write_dataset(directory: str | Path, count: int, h: int, w: int, seed: int) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, img in enumerate(synth_dataset(count, h, w, seed)):
        path = directory / f"synth_{i:03d}.png"
        imgio.save_image(img, path)
        paths.append(path)
    return paths
