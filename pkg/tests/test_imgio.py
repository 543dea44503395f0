import numpy as np
import pytest
from PIL import Image as PILImage

from compdeg.imgio import (
    decode_image,
    encode_png,
    from_uint8,
    load_image,
    save_image,
    to_uint8,
)

from conftest import random_image


class TestUint8Conversion:
    def test_roundtrip_on_lattice(self, rng):
        u8 = rng.integers(0, 256, size=(5, 7, 3), dtype=np.uint8)
        assert np.array_equal(to_uint8(from_uint8(u8)), u8)

    def test_rounding_error_bounded(self, rng):
        img = random_image(rng, 6, 6)
        back = from_uint8(to_uint8(img))
        assert np.abs(back - img).max() <= 0.5 / 255.0 + 1e-9


class TestPngRoundtrip:
    def test_encode_decode_identity(self, rng):
        img = random_image(rng, 9, 13)
        back = decode_image(encode_png(img))
        assert np.array_equal(to_uint8(back), to_uint8(img))

    def test_encode_is_deterministic(self, rng):
        img = random_image(rng, 8, 8)
        assert encode_png(img) == encode_png(img)


class TestFileIo:
    def test_png_save_load(self, tmp_path, rng):
        img = random_image(rng, 10, 12)
        path = tmp_path / "img.png"
        save_image(img, path)
        back = load_image(path)
        assert np.array_equal(to_uint8(back), to_uint8(img))

    def test_ppm_save_load(self, tmp_path, rng):
        img = random_image(rng, 5, 6)
        path = tmp_path / "img.ppm"
        save_image(img, path)
        assert path.read_bytes().startswith(b"P6")
        back = load_image(path)
        assert np.array_equal(to_uint8(back), to_uint8(img))

    def test_grayscale_expands_to_rgb(self, tmp_path, rng):
        gray = rng.integers(0, 256, size=(6, 6), dtype=np.uint8)
        path = tmp_path / "gray.png"
        PILImage.fromarray(gray, mode="L").save(path)
        img = load_image(path)
        assert img.shape == (3, 6, 6)
        assert np.array_equal(img[0], img[1]) and np.array_equal(img[1], img[2])

    def test_rejects_unknown_suffix(self, tmp_path, rng):
        with pytest.raises(ValueError, match="format"):
            save_image(random_image(rng, 4, 4), tmp_path / "img.bmp")
