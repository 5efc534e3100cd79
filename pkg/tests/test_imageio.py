import numpy as np
import pytest
from PIL import Image

from tvpath.imageio import (ImageFormatError, is_supported, quantize, read_image, to_gray,
                            write_image)


@pytest.mark.parametrize("suffix", [".png", ".pgm", ".ppm"])
def test_round_trip_is_exact_on_the_8bit_grid(tmp_path, suffix, rng):
    shape = (5, 7, 3) if suffix == ".ppm" else (5, 7)
    img = rng.integers(0, 256, size=shape) / 255.0
    write_image(tmp_path / f"a{suffix}", img)
    assert np.array_equal(read_image(tmp_path / f"a{suffix}"), img)


def test_quantisation_rounds_and_clamps():
    q = quantize(np.array([-0.2, 0.0, 0.5 / 255, 1.4 / 255, 1.0, 3.0]))
    assert q.tolist() == [0, 0, 0, 1, 255, 255]


def test_colour_modes(tmp_path):
    rgb = np.zeros((2, 2, 3))
    rgb[0, 0] = [1.0, 0.0, 0.0]
    write_image(tmp_path / "c.png", rgb)
    gray = read_image(tmp_path / "c.png", "gray")
    assert gray.shape == (2, 2) and gray[0, 0] == pytest.approx(0.299)
    write_image(tmp_path / "g.png", np.full((2, 2), 0.2))
    assert read_image(tmp_path / "g.png", "rgb").shape == (2, 2, 3)
    assert to_gray(np.ones((1, 1, 3)))[0, 0] == pytest.approx(1.0)
    with pytest.raises(ValueError):
        read_image(tmp_path / "g.png", "sepia")


def test_sixteen_bit_input(tmp_path):
    Image.fromarray(np.array([[0, 65535]], dtype=np.uint16)).save(tmp_path / "d.png")
    assert read_image(tmp_path / "d.png").tolist() == [[0.0, 1.0]]


def test_unsupported_suffix(tmp_path):
    assert is_supported("a.PNG") and not is_supported("a.jpg")
    with pytest.raises(ImageFormatError):
        read_image(tmp_path / "a.jpg")
