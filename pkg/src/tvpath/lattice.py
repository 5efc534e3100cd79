"""Pixel grid graph and its difference operator.

Images are numpy arrays: ``(h, w)`` for a single channel and ``(h, w, c)``
for multi-channel data. Edge vectors are ``(m,)`` or ``(m, c)`` and follow
the canonical edge order of :func:`build_lattice`.
"""
from __future__ import annotations

import operator
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError

MAX_PIXELS = 2**31 - 1


@dataclass(frozen=True)
class LatticeGraph:
    """4-connected ``height x width`` grid.

    Edge ``e`` joins pixel ``heads[e]`` to ``tails[e]`` (flat row-major
    indices, ``heads[e] < tails[e]``). Horizontal edges come first in scan
    order, then vertical edges.
    """

    height: int
    width: int

    @property
    def shape(self) -> tuple[int, int]:
        return (self.height, self.width)

    @property
    def pixel_count(self) -> int:
        return self.height * self.width

    @property
    def horizontal_count(self) -> int:
        return self.height * (self.width - 1)

    @property
    def edge_count(self) -> int:
        return self.horizontal_count + self.width * (self.height - 1)

    @property
    def heads(self) -> np.ndarray:
        return kernels.grid_edges(self.height, self.width)[0]

    @property
    def tails(self) -> np.ndarray:
        return kernels.grid_edges(self.height, self.width)[1]

    @property
    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.heads.tolist(), self.tails.tolist()))


def build_lattice(height: int, width: int) -> LatticeGraph:
    try:
        height = operator.index(height)
        width = operator.index(width)
    except TypeError:
        raise DimensionError(f"lattice dimensions must be integers, got {height!r}x{width!r}")
    if height < 1 or width < 1:
        raise DimensionError(f"lattice dimensions must be positive, got {height}x{width}")
    if height * width > MAX_PIXELS:
        raise DimensionError(f"{height}x{width} lattice exceeds {MAX_PIXELS} pixels")
    return LatticeGraph(height, width)


def lattice_for(image: np.ndarray) -> LatticeGraph:
    image = np.asarray(image)
    if image.ndim not in (2, 3):
        raise DimensionError(f"expected an (h, w) or (h, w, c) image, got shape {image.shape}")
    return build_lattice(image.shape[0], image.shape[1])


def to_columns(g: LatticeGraph, u) -> np.ndarray:
    """Reshape an image to the ``(p, c)`` kernel layout (float64, contiguous)."""
    u = np.asarray(u, dtype=np.float64)
    if u.ndim not in (2, 3) or u.shape[:2] != g.shape:
        raise DimensionError(f"image shape {u.shape} does not match lattice {g.shape}")
    c = 1 if u.ndim == 2 else u.shape[2]
    return np.ascontiguousarray(u.reshape(g.pixel_count, c))


def edges_to_columns(g: LatticeGraph, w) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.ndim not in (1, 2) or w.shape[0] != g.edge_count:
        raise DimensionError(f"edge vector shape {w.shape} does not match {g.edge_count} edges")
    c = 1 if w.ndim == 1 else w.shape[1]
    return np.ascontiguousarray(w.reshape(g.edge_count, c))


def apply_D(g: LatticeGraph, u) -> np.ndarray:
    """Edge differences ``u[i] - u[j]`` for every edge ``(i, j)``."""
    cols = to_columns(g, u)
    out = kernels.apply_d(cols, g.height, g.width)
    return out[:, 0] if np.ndim(u) == 2 else out


def apply_D_transpose(g: LatticeGraph, w) -> np.ndarray:
    """Adjoint of :func:`apply_D`; returns an image-shaped array."""
    cols = edges_to_columns(g, w)
    out = kernels.apply_dt(cols, g.height, g.width)
    if np.ndim(w) == 1:
        return out.reshape(g.shape)
    return out.reshape(g.height, g.width, cols.shape[1])
