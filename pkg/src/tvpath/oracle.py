"""Brute-force references for small problems, plus the projection timing benchmark.

Nothing here is meant for production sizes: the scale-space solver and the
dense projection assemble explicit matrices.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from . import kernels
from .dynamics import HyperParams
from .errors import OracleError, ParameterError
from .lattice import LatticeGraph, build_lattice, lattice_for, to_columns
from .projection import SupportSet

TINY_PIXELS = 64
DENSE_PIXEL_LIMIT = 10_000


def assemble_D(g: LatticeGraph) -> np.ndarray:
    D = np.zeros((g.edge_count, g.pixel_count))
    rows = np.arange(g.edge_count)
    D[rows, g.heads] = 1.0
    D[rows, g.tails] = -1.0
    return D


def assemble_D_sparse(g: LatticeGraph) -> scipy.sparse.csr_matrix:
    rows = np.repeat(np.arange(g.edge_count), 2)
    cols = np.column_stack([g.heads, g.tails]).ravel()
    vals = np.tile([1.0, -1.0], g.edge_count)
    return scipy.sparse.csr_matrix((vals, (rows, cols)), shape=(g.edge_count, g.pixel_count))


def dense_hessian(g: LatticeGraph, beta: float) -> np.ndarray:
    """Hessian of the split objective in the stacked variable ``(u, gamma)``."""
    D = assemble_D(g)
    p, m = g.pixel_count, g.edge_count
    H = np.empty((p + m, p + m))
    H[:p, :p] = np.eye(p) + 2.0 * beta * D.T @ D
    H[:p, p:] = -2.0 * beta * D.T
    H[p:, :p] = -2.0 * beta * D
    H[p:, p:] = 2.0 * beta * np.eye(m)
    return H


def scale_space_objective(x, u, gamma, beta: float, lam: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    D = assemble_D(lattice_for(x))
    r = D @ np.ravel(u) - gamma
    return (0.5 * float(np.sum((np.ravel(u) - x.ravel()) ** 2))
            + beta * float(r @ r) + lam * float(np.abs(gamma).sum()))


def _soft(v, t):
    return np.sign(v) * np.maximum(np.abs(v) - t, 0.0)


def solve_scale_space(x, lam: float, beta: float = 1.0, tol: float = 1e-13,
                      max_iter: int = 500_000):
    """Minimise ``1/2||u-x||^2 + beta||Du-gamma||^2 + lam||gamma||_1`` on a tiny image.

    Exact alternating minimisation: a linear solve in ``u`` and a soft
    threshold of ``Du`` at ``lam / (2 beta)`` in ``gamma``, until the
    objective changes by less than ``tol``. ``lam=np.inf`` pins ``gamma`` to 0.
    Returns ``(u, gamma)`` with ``u`` image-shaped.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ParameterError("scale-space oracle handles single-channel images only")
    g = lattice_for(x)
    if g.pixel_count > TINY_PIXELS:
        raise ParameterError(f"oracle limited to {TINY_PIXELS} pixels, got {g.pixel_count}")
    if lam < 0 or beta <= 0:
        raise ParameterError(f"need lam >= 0 and beta > 0, got lam={lam}, beta={beta}")
    D = assemble_D(g)
    xv = x.ravel()
    chol = scipy.linalg.cho_factor(np.eye(g.pixel_count) + 2.0 * beta * D.T @ D)
    gamma = np.zeros(g.edge_count)
    if np.isinf(lam):
        return scipy.linalg.cho_solve(chol, xv).reshape(x.shape), gamma
    thresh = lam / (2.0 * beta)
    prev = np.inf
    for _ in range(max_iter):
        u = scipy.linalg.cho_solve(chol, xv + 2.0 * beta * D.T @ gamma)
        gamma = _soft(D @ u, thresh)
        obj = scale_space_objective(x, u, gamma, beta, lam)
        if prev - obj < tol:
            return u.reshape(x.shape), gamma
        prev = obj
    raise OracleError(f"alternating minimisation did not settle in {max_iter} sweeps")


def grid_search_scale_space(x, lam: float, beta: float = 1.0, resolution: float = 1e-3,
                            chunk: int = 20_000):
    """Exhaustive coarse-to-fine grid minimisation over ``(u, gamma)``.

    Each stage scans every point of a box around the previous best (the
    first box covers all plausible values); spacing shrinks 10x per stage
    down to ``resolution``. Given ``u`` the objective separates over the
    ``gamma`` coordinates, so each gamma axis is minimised on its own; the
    result is still the minimum over the full product grid. Only sensible
    for images of a handful of pixels. Returns ``(u, gamma, objective)``.
    """
    x = np.asarray(x, dtype=np.float64)
    g = lattice_for(x)
    p, m = g.pixel_count, g.edge_count
    if p > 4:
        raise ParameterError("grid search is limited to 4 pixels")
    xv = x.ravel()
    heads, tails = g.heads, g.tails
    lo, hi = float(xv.min()), float(xv.max())
    spread = max(hi - lo, 1e-3)
    centre = np.concatenate([np.full(p, 0.5 * (lo + hi)), np.zeros(m)])
    half = np.concatenate([np.full(p, 0.5 * spread + 0.25), np.full(m, spread + 0.25)])
    spacing = 10.0 ** np.ceil(np.log10(spread / 20))
    while True:
        axes = [c + spacing * np.arange(-np.floor(h / spacing), np.floor(h / spacing) + 1)
                for c, h in zip(centre, half)]
        shape = tuple(len(a) for a in axes[:p])
        total = int(np.prod(shape))
        best_val, best = np.inf, None
        for start in range(0, total, chunk):
            idx = np.unravel_index(np.arange(start, min(start + chunk, total)), shape)
            u = np.column_stack([a[i] for a, i in zip(axes[:p], idx)])
            val = 0.5 * np.sum((u - xv) ** 2, axis=1)
            gam = np.empty((u.shape[0], m))
            for e in range(m):
                gax = axes[p + e]
                d = u[:, heads[e]] - u[:, tails[e]]
                term = beta * (d[:, None] - gax[None, :]) ** 2 + lam * np.abs(gax)[None, :]
                j = np.argmin(term, axis=1)
                gam[:, e] = gax[j]
                val += term[np.arange(len(j)), j]
            i = int(np.argmin(val))
            if val[i] < best_val:
                best_val, best = float(val[i]), np.concatenate([u[i], gam[i]])
        if spacing <= resolution * (1 + 1e-9):
            return best[:p].reshape(x.shape), best[p:], best_val
        centre = best
        half = np.full(p + m, 2 * spacing)
        spacing /= 10


def _inactive_rows(g: LatticeGraph, s: SupportSet):
    return np.flatnonzero(~np.asarray(s.flags, dtype=bool))


def dense_projection(u, s: SupportSet) -> np.ndarray:
    """``(I - A^+ A) u`` with ``A`` the rows of ``D`` on inactive edges (dense pseudo-inverse)."""
    u = np.asarray(u, dtype=np.float64)
    g = lattice_for(u)
    if g.pixel_count > DENSE_PIXEL_LIMIT:
        raise ParameterError(f"dense projection limited to {DENSE_PIXEL_LIMIT} pixels")
    cols = to_columns(g, u)
    A = assemble_D(g)[_inactive_rows(g, s)]
    if A.shape[0] == 0:
        return u.copy()
    # numpy's default cut-off (1e-15 relative) inverts rounding noise in the
    # singular values of rank-deficient A; use the usual max(M, N) * eps.
    rcond = max(A.shape) * np.finfo(np.float64).eps
    out = cols - np.linalg.pinv(A, rcond=rcond) @ (A @ cols)
    return out.reshape(u.shape)


def lsq_projection(u, s: SupportSet, tol: float = 1e-14) -> np.ndarray:
    """Same projection through LSQR: the minimum-norm solution of ``A w = A u``
    is ``A^+ A u``."""
    u = np.asarray(u, dtype=np.float64)
    g = lattice_for(u)
    cols = to_columns(g, u)
    A = assemble_D_sparse(g)[_inactive_rows(g, s)]
    if A.shape[0] == 0:
        return u.copy()
    out = np.empty_like(cols)
    for ch in range(cols.shape[1]):
        b = A @ cols[:, ch]
        w = scipy.sparse.linalg.lsqr(A, b, atol=tol, btol=tol,
                                     iter_lim=20 * g.pixel_count)[0]
        out[:, ch] = cols[:, ch] - w
    return out.reshape(u.shape)


def graph_projection(u, s: SupportSet) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    g = lattice_for(u)
    labels, count = kernels.components(s.flags, g.height, g.width)
    return kernels.component_means(to_columns(g, u), labels, count).reshape(u.shape)


PROJECTORS = {
    "graph": graph_projection,
    "dense": dense_projection,
    "lsq": lsq_projection,
}


@dataclass
class BenchReport:
    height: int
    width: int
    iters: int
    projections: int
    sparsity: float
    iterate_time: float
    times: dict = field(default_factory=dict)
    skipped: dict = field(default_factory=dict)
    max_abs_diff: dict = field(default_factory=dict)

    @property
    def graph_time(self):
        return self.times.get("graph")

    @property
    def dense_time(self):
        return self.times.get("dense")

    @property
    def lsq_time(self):
        return self.times.get("lsq")

    @property
    def equivalent(self) -> bool:
        return all(d <= 1e-8 for d in self.max_abs_diff.values())

    @property
    def graph_dense_ratio(self):
        if self.dense_time is None or not self.graph_time:
            return None
        return self.dense_time / self.graph_time

    def items(self):
        yield "size", f"{self.height}x{self.width}"
        yield "iters", self.iters
        yield "projections", self.projections
        yield "sparsity", f"{self.sparsity:.6f}"
        yield "iterate_time", f"{self.iterate_time:.6f}"
        for name in PROJECTORS:
            if name in self.times:
                yield f"{name}_time", f"{self.times[name]:.6f}"
            elif name in self.skipped:
                yield f"{name}_time", f"skipped ({self.skipped[name]})"
        for name, diff in self.max_abs_diff.items():
            yield f"{name}_max_abs_diff", f"{diff:.3e}"
        ratio = self.graph_dense_ratio
        if ratio is not None:
            yield "graph_dense_ratio", f"{ratio:.3f}"
        yield "equivalent", str(self.equivalent).lower()

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.items())


def _warm_up():
    x = np.zeros((4, 1))
    z = np.zeros((4, 1))
    kernels.advance(x, x.copy(), z, z.copy(), 2, 2, 5.0, 0.01, 1.0, 5, 1)
    kernels.components(np.zeros(4, dtype=bool), 2, 2)
    kernels.component_means(x, np.zeros(4, dtype=np.int64), 1)


def timing_benchmark(size, iters: int, *, image=None, projections: int = 1,
                     methods=("graph", "dense", "lsq"), hp: HyperParams | None = None) -> BenchReport:
    """Time the three projection strategies inside identical iteration loops.

    Each method runs ``iters`` iterations from the blank image and projects
    the iterate ``projections`` times at evenly spaced checkpoints, the last
    one at the final iterate. Methods that cannot run at this size (dense
    above 10^4 pixels) are reported as skipped.
    """
    h, w = size
    g = build_lattice(h, w)
    if iters < 1 or projections < 1:
        raise ParameterError("iters and projections must be positive")
    hp = hp or HyperParams()
    if image is None:
        from .samples import synthetic_image
        image = synthetic_image(h, w)
    x = np.asarray(image, dtype=np.float64)
    if x.shape[:2] != (h, w):
        raise ParameterError(f"image shape {x.shape} does not match size {size}")
    alpha = hp.resolve_alpha(g)
    xc = to_columns(g, x)
    m = g.edge_count
    checkpoints = np.unique(np.linspace(0, iters, projections + 1).round().astype(int)[1:])

    def loop(project):
        u = np.zeros_like(xc)
        z = np.zeros((m, xc.shape[1]))
        gamma = np.zeros_like(z)
        done = 0
        out = None
        for stop in checkpoints:
            kernels.advance(xc, u, z, gamma, h, w, hp.kappa, alpha, hp.beta, m + 1, stop - done)
            done = stop
            if project is not None:
                s = SupportSet(np.any(gamma != 0.0, axis=1))
                out = project(u.reshape(x.shape), s)
        return out, (np.count_nonzero(np.any(gamma != 0.0, axis=1)) / m if m else 1.0)

    _warm_up()
    t0 = time.perf_counter()
    _, sparsity = loop(None)
    iterate_time = time.perf_counter() - t0
    report = BenchReport(h, w, iters, len(checkpoints), sparsity, iterate_time)
    results = {}
    for name in methods:
        if name == "dense" and g.pixel_count > DENSE_PIXEL_LIMIT:
            report.skipped[name] = f"{g.pixel_count} pixels exceeds {DENSE_PIXEL_LIMIT}"
            continue
        t0 = time.perf_counter()
        results[name], _ = loop(PROJECTORS[name])
        report.times[name] = time.perf_counter() - t0
    if "graph" in results:
        for name, img in results.items():
            if name != "graph":
                report.max_abs_diff[name] = float(np.max(np.abs(img - results["graph"]), initial=0.0))
    return report
