"""Vectorized numpy versions of the hot loops.

Arrays follow the kernel layout: pixel arrays are ``(p, c)`` and edge arrays
``(m, c)``, float64, C-contiguous. Horizontal edges come first (row-major),
then vertical edges.
"""
from functools import lru_cache

import numpy as np


@lru_cache(maxsize=32)
def grid_edges(h, w):
    idx = np.arange(h * w, dtype=np.int64).reshape(h, w)
    heads = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
    tails = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
    heads.flags.writeable = False
    tails.flags.writeable = False
    return heads, tails


def apply_d(u, h, w):
    c = u.shape[1]
    img = u.reshape(h, w, c)
    horiz = (img[:, :-1] - img[:, 1:]).reshape(-1, c)
    vert = (img[:-1, :] - img[1:, :]).reshape(-1, c)
    return np.concatenate([horiz, vert])


def apply_dt(r, h, w):
    c = r.shape[1]
    nh = h * (w - 1)
    out = np.zeros((h, w, c))
    horiz = r[:nh].reshape(h, w - 1, c)
    vert = r[nh:].reshape(h - 1, w, c)
    out[:, :-1] += horiz
    out[:, 1:] -= horiz
    out[:-1, :] += vert
    out[1:, :] -= vert
    return out.reshape(h * w, c)


def shrink(z, kappa):
    """``kappa * prox(z)``: scalar soft threshold for one channel, group otherwise."""
    if z.shape[1] == 1:
        return kappa * (np.sign(z) * np.maximum(np.abs(z) - 1.0, 0.0))
    sq = z[:, 0] * z[:, 0]
    for ch in range(1, z.shape[1]):
        sq = sq + z[:, ch] * z[:, ch]
    norm = np.sqrt(sq)
    keep = norm >= 1.0
    scale = np.zeros_like(norm)
    scale[keep] = 1.0 - 1.0 / norm[keep]
    return kappa * (scale[:, None] * z)


def count_groups(gamma):
    return int(np.count_nonzero(np.any(gamma != 0.0, axis=1)))


def advance(x, u, z, gamma, h, w, kappa, alpha, beta, target_nnz, max_steps):
    """Run iterations in place until ``target_nnz`` groups are active or
    ``max_steps`` iterations are spent. Returns ``(steps, nnz)``."""
    nnz = count_groups(gamma)
    steps = 0
    two_beta = 2.0 * beta
    step_u = kappa * alpha
    while steps < max_steps and nnz < target_nnz:
        r = apply_d(u, h, w) - gamma
        g = (u - x) + two_beta * apply_dt(r, h, w)
        u -= step_u * g
        z -= alpha * (-(two_beta * r))
        gamma[...] = shrink(z, kappa)
        nnz = count_groups(gamma)
        steps += 1
    return steps, nnz


def components(active, h, w):
    """Label pixels by connectivity over the inactive edges.

    Hook-and-compress label propagation: every round hooks the larger root of
    each straddling edge onto the smaller one, then pointer-jumps to full
    compression. Roots end up as the smallest pixel index of each component.
    """
    p = h * w
    heads, tails = grid_edges(h, w)
    free = ~np.asarray(active, dtype=bool)
    a, b = heads[free], tails[free]
    parent = np.arange(p, dtype=np.int64)
    while a.size:
        pa, pb = parent[a], parent[b]
        lo = np.minimum(pa, pb)
        hi = np.maximum(pa, pb)
        split = lo != hi
        if not split.any():
            break
        np.minimum.at(parent, hi[split], lo[split])
        while True:
            jumped = parent[parent]
            if np.array_equal(jumped, parent):
                break
            parent = jumped
    roots, labels = np.unique(parent, return_inverse=True)
    return labels.astype(np.int64), len(roots)


def component_means(values, labels, count):
    # Offsets from each component's first pixel are averaged, so a constant
    # component reproduces its value exactly and projection is idempotent.
    sizes = np.bincount(labels, minlength=count).astype(np.float64)
    first = np.full(count, labels.shape[0], dtype=np.int64)
    np.minimum.at(first, labels, np.arange(labels.shape[0]))
    out = np.empty_like(values)
    for ch in range(values.shape[1]):
        base = values[first, ch]
        sums = np.bincount(labels, weights=values[:, ch] - base[labels], minlength=count)
        out[:, ch] = (base + sums / sizes)[labels]
    return out
