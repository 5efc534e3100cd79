"""Sparse projection by connected components.

Projecting ``u`` onto ``{v : v_i = v_j for every inactive edge (i, j)}``
amounts to averaging ``u`` over each connected component of the graph that
keeps only the inactive edges. Labelling is a single union-find pass, so the
whole projection is linear in the pixel count.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DimensionError
from .lattice import LatticeGraph, lattice_for, to_columns


@dataclass(frozen=True)
class SupportSet:
    """Edges whose ``gamma`` entry (or channel group) is nonzero."""

    flags: np.ndarray

    @property
    def edge_count(self) -> int:
        return int(self.flags.shape[0])

    @property
    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.flags))

    @classmethod
    def from_gamma(cls, gamma) -> "SupportSet":
        gamma = np.asarray(gamma)
        flags = gamma != 0 if gamma.ndim == 1 else np.any(gamma != 0, axis=1)
        return cls(np.ascontiguousarray(flags, dtype=bool))

    @classmethod
    def from_edges(cls, g: LatticeGraph, edges) -> "SupportSet":
        """Support given as ``(i, j)`` pixel pairs; order within a pair is ignored."""
        lookup = {pair: e for e, pair in enumerate(g.edges)}
        flags = np.zeros(g.edge_count, dtype=bool)
        for i, j in edges:
            key = (min(i, j), max(i, j))
            if key not in lookup:
                raise DimensionError(f"({i}, {j}) is not an edge of the {g.shape} lattice")
            flags[lookup[key]] = True
        return cls(flags)


@dataclass(frozen=True)
class ComponentPartition:
    """Component id per pixel; ids are ordered by smallest member pixel."""

    labels: np.ndarray
    count: int

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.count)

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.labels == c)


def find_components(g: LatticeGraph, s: SupportSet) -> ComponentPartition:
    if s.edge_count != g.edge_count:
        raise DimensionError(f"support has {s.edge_count} flags, lattice has {g.edge_count} edges")
    labels, count = kernels.components(s.flags, g.height, g.width)
    return ComponentPartition(labels, int(count))


def project(u, partition: ComponentPartition) -> np.ndarray:
    """Replace each pixel by the mean of ``u`` over its component (per channel)."""
    u = np.asarray(u, dtype=np.float64)
    g = lattice_for(u)
    if partition.labels.shape[0] != g.pixel_count:
        raise DimensionError(
            f"partition covers {partition.labels.shape[0]} pixels, image has {g.pixel_count}"
        )
    cols = to_columns(g, u)
    return kernels.component_means(cols, partition.labels, partition.count).reshape(u.shape)


def project_support(u, s: SupportSet) -> np.ndarray:
    """:func:`find_components` followed by :func:`project`."""
    g = lattice_for(u)
    return project(u, find_components(g, s))


def sparsity_level(s: SupportSet) -> float:
    """Fraction of active edges. A lattice without edges counts as fully supported."""
    if s.edge_count == 0:
        return 1.0
    return s.nonzero_count / s.edge_count
