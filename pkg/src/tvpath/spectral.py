"""Low/high frequency split by a radial cut-off and averaged spectral differences."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError


@dataclass(frozen=True)
class FrequencyMask:
    """Radial mask in centred (fftshifted) integer frequency coordinates.

    Frequencies at distance exactly ``radius`` belong to the low band.
    """

    height: int
    width: int
    radius: float
    mode: str = "low"

    def __post_init__(self):
        if not self.radius > 0:
            raise ParameterError(f"cut-off radius must be positive, got {self.radius}")
        if self.mode not in ("low", "high"):
            raise ParameterError(f"mode must be 'low' or 'high', got {self.mode!r}")

    def array(self) -> np.ndarray:
        dist = radial_distance(self.height, self.width)
        low = dist <= self.radius
        return (low if self.mode == "low" else ~low).astype(np.float64)


def radial_distance(height, width):
    ky = np.arange(height) - height // 2
    kx = np.arange(width) - width // 2
    return np.hypot(ky[:, None], kx[None, :])


def centred_fft(x):
    return np.fft.fftshift(np.fft.fft2(x, axes=(0, 1)), axes=(0, 1))


def _broadcast_mask(mask, x):
    return mask if x.ndim == 2 else mask[..., None]


def decompose(x, r: float):
    """Split ``x`` into ``(low, high)`` with ``low + high == x``.

    ``low`` keeps the centred frequencies within radius ``r``; multi-channel
    images are transformed per channel.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim not in (2, 3):
        raise DimensionError(f"expected an (h, w) or (h, w, c) image, got {x.shape}")
    mask = FrequencyMask(x.shape[0], x.shape[1], r).array()
    spec = centred_fft(x)
    mask = _broadcast_mask(mask, x)

    def back(s):
        return np.real(np.fft.ifft2(np.fft.ifftshift(s, axes=(0, 1)), axes=(0, 1)))

    return back(spec * mask), back(spec * (1.0 - mask))


def energy(x) -> float:
    return float(np.sum(np.asarray(x, dtype=np.float64) ** 2))


def band_energy(x, r: float):
    """``(low, high)`` energies of ``x`` split at radius ``r``."""
    low, high = decompose(x, r)
    return energy(low), energy(high)


def expected_spectral_diff(originals, smoothed) -> np.ndarray:
    """Magnitude of the mean centred Fourier difference over aligned image pairs.

    Differences are averaged as complex spectra and the magnitude is taken
    last. Colour inputs are averaged over channels as well.
    """
    originals = list(originals)
    smoothed = list(smoothed)
    if not originals:
        raise ParameterError("need at least one image pair")
    if len(originals) != len(smoothed):
        raise ParameterError(f"{len(originals)} originals but {len(smoothed)} smoothed images")
    acc = None
    for a, b in zip(originals, smoothed):
        a = np.asarray(a, dtype=np.float64)
        b = np.asarray(b, dtype=np.float64)
        if a.shape != b.shape:
            raise DimensionError(f"pair shapes differ: {a.shape} vs {b.shape}")
        d = centred_fft(a - b)
        if d.ndim == 3:
            d = d.mean(axis=2)
        if acc is None:
            acc = np.zeros_like(d)
        elif acc.shape != d.shape:
            raise DimensionError("all pairs must share the same spatial size")
        acc += d
    return np.abs(acc / len(originals))


def spectrum_band_fraction(spectrum, r: float) -> float:
    """Share of ``sum(spectrum**2)`` lying strictly outside radius ``r``."""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    total = float(np.sum(spectrum**2))
    if total == 0.0:
        return 0.0
    outside = radial_distance(*spectrum.shape[:2]) > r
    return float(np.sum(spectrum[outside] ** 2)) / total


def heatmap(spectrum) -> np.ndarray:
    """Scale a spectrum to [0, 1] by its maximum (all-zero stays zero)."""
    spectrum = np.asarray(spectrum, dtype=np.float64)
    peak = spectrum.max(initial=0.0)
    return spectrum / peak if peak > 0 else np.zeros_like(spectrum)
