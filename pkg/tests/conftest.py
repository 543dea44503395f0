import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_image(rng, h, w):
    """Structured random test image in [0,1]: gradient + blobs + texture."""
    yy, xx = np.meshgrid(np.linspace(0, 1, h), np.linspace(0, 1, w), indexing="ij")
    img = np.zeros((3, h, w), dtype=np.float64)
    for c in range(3):
        a, b, o = rng.uniform(-1, 1, 3)
        img[c] = 0.5 + 0.3 * (a * yy + b * xx) + 0.1 * np.sin(o * 9 + 13 * (xx + (c + 1) * yy))
    for _ in range(4):
        cy, cx = rng.uniform(0.1, 0.9, 2)
        rad = rng.uniform(0.05, 0.3)
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 < rad**2
        img[:, mask] = rng.uniform(0, 1, 3)[:, None]
    return np.clip(img, 0.0, 1.0).astype(np.float32)


@pytest.fixture
def test_image(rng):
    return random_image(rng, 24, 24)
