"""Deterministic synthetic test images."""
import numpy as np


def synthetic_image(height, width, seed=0, channels=None):
    """Piecewise-smooth scene with a few shapes, a ramp and fine texture.

    Values lie in [0, 1]. ``channels=3`` gives a colour image whose channels
    share the geometry but not the intensities.
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    yy /= max(height - 1, 1)
    xx /= max(width - 1, 1)
    n_ch = 1 if channels is None else channels
    out = np.empty((height, width, n_ch))
    shapes = []
    for _ in range(4):
        cy, cx = rng.uniform(0.15, 0.85, size=2)
        rad = rng.uniform(0.1, 0.3)
        shapes.append((cy, cx, rad, rng.integers(2)))
    for ch in range(n_ch):
        img = 0.25 + 0.3 * xx + 0.1 * yy
        for cy, cx, rad, kind in shapes:
            if kind:
                mask = (yy - cy) ** 2 + (xx - cx) ** 2 < rad**2
            else:
                mask = (np.abs(yy - cy) < rad) & (np.abs(xx - cx) < 0.7 * rad)
            img = np.where(mask, rng.uniform(0.0, 1.0), img)
        img = img + 0.04 * rng.standard_normal(img.shape)
        out[..., ch] = img
    out = np.clip(out, 0.0, 1.0)
    return out[..., 0] if channels is None else out
