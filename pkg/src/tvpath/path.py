"""Drive the iteration and emit projected snapshots at requested sparsity levels."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .dynamics import HyperParams
from .errors import ParameterError
from .lattice import lattice_for, to_columns
from .projection import SupportSet

# Above this level the smoothed images start to carry fine-scale texture again.
HIGH_LEVEL_WARNING = 0.9
SMALL_IMAGE_PIXELS = 64 * 64


class SparsityLevelWarning(UserWarning):
    pass


def default_level(shape) -> float:
    """0.6 for images up to 64x64 pixels, 0.3 for larger ones."""
    return 0.6 if shape[0] * shape[1] <= SMALL_IMAGE_PIXELS else 0.3


def level_count(level: float, edge_count: int) -> int:
    """Smallest active-edge count whose fraction reaches ``level``."""
    return max(0, math.ceil(level * edge_count - 1e-9))


@dataclass(frozen=True)
class PathConfig:
    snapshot_levels: tuple[float, ...]
    stop_level: float | None = None
    max_iters: int | None = None
    hp: HyperParams = field(default_factory=HyperParams)

    def __post_init__(self):
        levels = tuple(float(v) for v in self.snapshot_levels)
        if not levels and self.stop_level is None:
            raise ParameterError("need at least one snapshot level or a stop level")
        for v in levels:
            if not 0.0 < v <= 1.0:
                raise ParameterError(f"snapshot level {v} outside (0, 1]")
        if any(b <= a for a, b in zip(levels, levels[1:])):
            raise ParameterError(f"snapshot levels must be strictly ascending, got {levels}")
        stop = max(levels) if self.stop_level is None else float(self.stop_level)
        if not 0.0 < stop <= 1.0:
            raise ParameterError(f"stop level {stop} outside (0, 1]")
        dropped = [v for v in levels if v > stop]
        if dropped:
            warnings.warn(f"snapshot levels {dropped} exceed stop level {stop} and are dropped",
                          SparsityLevelWarning, stacklevel=3)
            levels = tuple(v for v in levels if v <= stop)
        if stop > HIGH_LEVEL_WARNING:
            warnings.warn(f"stop level {stop} is above {HIGH_LEVEL_WARNING}; fine-scale "
                          "texture and noise will be retained", SparsityLevelWarning,
                          stacklevel=3)
        max_iters = self.hp.max_iters if self.max_iters is None else int(self.max_iters)
        if max_iters < 1:
            raise ParameterError(f"max_iters must be positive, got {max_iters}")
        object.__setattr__(self, "snapshot_levels", levels)
        object.__setattr__(self, "stop_level", stop)
        object.__setattr__(self, "max_iters", max_iters)


@dataclass(frozen=True)
class Snapshot:
    """Projected image at the first iterate whose sparsity reached ``requested_level``.

    ``shared_iterate`` marks snapshots taken from an iterate that crossed
    several requested levels at once. ``terminal`` marks the snapshot added
    when the iteration budget ran out; its ``requested_level`` is the
    sparsity actually reached. ``support`` holds the active edges the image
    was projected with.
    """

    image: np.ndarray
    achieved_sparsity: float
    iteration: int
    requested_level: float
    shared_iterate: bool = False
    terminal: bool = False
    support: SupportSet | None = None


@dataclass
class PathResult:
    snapshots: list[Snapshot]
    truncated: bool
    iterations: int
    final_sparsity: float
    alpha: float

    def __len__(self):
        return len(self.snapshots)

    def __iter__(self):
        return iter(self.snapshots)

    def __getitem__(self, i):
        return self.snapshots[i]


def _check_image(x):
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise ParameterError("image contains non-finite values")
    if x.size and (x.min() < 0.0 or x.max() > 1.0):
        raise ParameterError(f"image values must lie in [0, 1], got [{x.min()}, {x.max()}]")
    return x


def run_path(x, cfg: PathConfig) -> PathResult:
    """Iterate from the blank image and snapshot every requested level on first crossing.

    Stops once the sparsity reaches ``cfg.stop_level`` or after
    ``cfg.max_iters`` iterations; in the latter case ``truncated`` is set and
    a terminal snapshot of the last iterate is appended.
    """
    x = _check_image(x)
    g = lattice_for(x)
    hp = cfg.hp
    alpha = hp.resolve_alpha(g)
    m = g.edge_count
    levels = list(cfg.snapshot_levels)

    if m == 0:
        # No edges: the projection is the identity and the path's limit is x.
        empty = SupportSet(np.zeros(0, dtype=bool))
        shots = [Snapshot(x.copy(), 1.0, 0, v, len(levels) > 1, support=empty) for v in levels]
        return PathResult(shots, False, 0, 1.0, alpha)

    xc = to_columns(g, x)
    u = np.zeros_like(xc)
    z = np.zeros((m, xc.shape[1]))
    gamma = np.zeros_like(z)

    def snap(nnz, k, requested, shared=False, terminal=False):
        flags = np.any(gamma != 0.0, axis=1)
        labels, count = kernels.components(flags, g.height, g.width)
        image = kernels.component_means(u, labels, count).reshape(x.shape)
        return Snapshot(image, nnz / m, k, requested, shared, terminal, SupportSet(flags))

    stop_count = level_count(cfg.stop_level, m)
    shots: list[Snapshot] = []
    k = nnz = 0
    truncated = False
    while True:
        target = stop_count
        if levels:
            target = min(target, level_count(levels[0], m))
        steps, nnz = kernels.advance(xc, u, z, gamma, g.height, g.width,
                                     hp.kappa, alpha, hp.beta, target, cfg.max_iters - k)
        k += steps
        crossed = [v for v in levels if nnz >= level_count(v, m)]
        if crossed:
            first = snap(nnz, k, crossed[0])
            for v in crossed:
                shots.append(Snapshot(first.image, nnz / m, k, v, len(crossed) > 1,
                                      support=first.support))
            levels = levels[len(crossed):]
        if nnz >= stop_count:
            break
        if k >= cfg.max_iters:
            truncated = True
            break

    if truncated and not (shots and shots[-1].iteration == k):
        shots.append(snap(nnz, k, nnz / m, terminal=True))
    return PathResult(shots, truncated, k, nnz / m, alpha)


def smooth_to_level(x, level: float, hp: HyperParams | None = None,
                    max_iters: int | None = None) -> Snapshot:
    """Projected image at the first iterate reaching ``level``.

    If the budget runs out first, the terminal snapshot is returned (its
    ``terminal`` flag is set).
    """
    cfg = PathConfig((level,), max_iters=max_iters, hp=hp or HyperParams())
    return run_path(x, cfg).snapshots[-1]
