import numpy as np
import pytest


def natural_image(name, size):
    """Grayscale skimage sample rescaled to [0, 1] and resized with anti-aliasing."""
    from skimage import color, data, transform

    img = getattr(data, name)()
    if img.ndim == 3:
        img = color.rgb2gray(img[..., :3])
    img = img.astype(np.float64)
    img = (img - img.min()) / (img.max() - img.min())
    return np.clip(transform.resize(img, size, anti_aliasing=True), 0.0, 1.0)


PHOTOS = ("camera", "astronaut", "coffee", "chelsea", "rocket", "brick", "grass", "gravel",
          "moon", "coins", "retina", "immunohistochemistry")


def natural_patches(count, size=32, seed=0, scale=128):
    """Random ``size x size`` patches of the sample photos after resizing them to ``scale``."""
    rng = np.random.default_rng(seed)
    sources = [natural_image(name, (scale, scale)) for name in PHOTOS]
    out = []
    for i in range(count):
        img = sources[i % len(sources)]
        r, c = rng.integers(0, scale - size + 1, size=2)
        out.append(img[r:r + size, c:c + size].copy())
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240617)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
