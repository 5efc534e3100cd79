"""Split-objective iteration that grows the edge support from a blank image.

The split objective is

    L(u, gamma) = 1/2 ||u - x||^2 + beta ||D u - gamma||^2

and one iteration performs a gradient step on ``u`` (scaled by ``kappa``),
a gradient step on the dual variable ``z``, and recovers ``gamma`` as
``kappa * prox(z)`` with the unit soft threshold (single channel) or the
unit group threshold over channels (colour).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import (
    DimensionError,
    HessianNormFallbackWarning,
    ParameterError,
    StepSizeError,
)
from .lattice import LatticeGraph, apply_D, apply_D_transpose, lattice_for

# lambda_max(D^T D) for any 4-connected grid is below 8.
LAPLACIAN_BOUND = 8.0
DESCENT_SLACK = 1e-12


@dataclass(frozen=True)
class HyperParams:
    """Iteration hyperparameters.

    ``beta`` is the splitting weight (also called nu). When ``alpha`` is None
    the step size is ``1 / (kappa * ||H||)`` with ``H`` the Hessian of the
    split objective.
    """

    kappa: float = 5.0
    beta: float = 1.0
    alpha: float | None = None
    max_iters: int = 50_000

    def __post_init__(self):
        if not self.kappa > 0:
            raise ParameterError(f"kappa must be positive, got {self.kappa}")
        if not self.beta > 0:
            raise ParameterError(f"beta must be positive, got {self.beta}")
        if self.alpha is not None and not self.alpha > 0:
            raise ParameterError(f"alpha must be positive, got {self.alpha}")
        if int(self.max_iters) != self.max_iters or self.max_iters < 1:
            raise ParameterError(f"max_iters must be a positive integer, got {self.max_iters}")

    @property
    def alpha_mode(self) -> str:
        return "auto" if self.alpha is None else "explicit"

    def resolve_alpha(self, g: LatticeGraph) -> float:
        """Concrete step size for lattice ``g``; rejects unstable explicit values."""
        hnorm = estimate_hessian_norm(g, self.beta)
        if self.alpha is None:
            return 1.0 / (self.kappa * hnorm)
        limit = 2.0 / (self.kappa * hnorm)
        if self.alpha >= limit:
            raise ParameterError(
                f"alpha={self.alpha} violates alpha < 2/(kappa*||H||) = {limit:.6g}"
            )
        return float(self.alpha)


@dataclass(frozen=True)
class IterState:
    """Iterate ``(u, z, gamma)`` after ``k`` steps."""

    u: np.ndarray
    z: np.ndarray
    gamma: np.ndarray
    k: int = 0


def zero_state(x) -> IterState:
    """Blank-image start: ``u = 0``, ``z = 0``, ``gamma = 0``."""
    x = np.asarray(x, dtype=np.float64)
    g = lattice_for(x)
    edge_shape = (g.edge_count,) if x.ndim == 2 else (g.edge_count, x.shape[2])
    return IterState(np.zeros_like(x), np.zeros(edge_shape), np.zeros(edge_shape), 0)


def _check(x, state):
    x = np.asarray(x, dtype=np.float64)
    if state.u.shape != x.shape:
        raise DimensionError(f"u has shape {state.u.shape}, image has {x.shape}")
    g = lattice_for(x)
    expected = (g.edge_count,) + x.shape[2:]
    if state.gamma.shape != expected or state.z.shape != expected:
        raise DimensionError(f"edge variables must have shape {expected}")
    return x, g


def split_objective(x, u, gamma, beta: float) -> float:
    x = np.asarray(x, dtype=np.float64)
    g = lattice_for(x)
    r = apply_D(g, u) - gamma
    return 0.5 * float(np.sum((u - x) ** 2)) + beta * float(np.sum(r**2))


def grad_u(x, state: IterState, beta: float) -> np.ndarray:
    """``(u - x) + 2 beta D^T (D u - gamma)``."""
    x, g = _check(x, state)
    r = apply_D(g, state.u) - state.gamma
    return (state.u - x) + 2.0 * beta * apply_D_transpose(g, r)


def grad_gamma(state: IterState, beta: float) -> np.ndarray:
    """``-2 beta (D u - gamma)``."""
    g = lattice_for(state.u)
    if state.gamma.shape != (g.edge_count,) + state.u.shape[2:]:
        raise DimensionError(f"gamma shape {state.gamma.shape} does not match u {state.u.shape}")
    return -2.0 * beta * (apply_D(g, state.u) - state.gamma)


def prox_l1(z) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    return np.sign(z) * np.maximum(np.abs(z) - 1.0, 0.0)


def prox_group(z) -> np.ndarray:
    """Row-wise group threshold: rows with norm below 1 vanish, others shrink by 1."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 2:
        raise DimensionError(f"group prox expects (m, c) input, got shape {z.shape}")
    sq = z[:, 0] * z[:, 0]
    for ch in range(1, z.shape[1]):
        sq = sq + z[:, ch] * z[:, ch]
    norm = np.sqrt(sq)
    keep = norm >= 1.0
    scale = np.zeros_like(norm)
    scale[keep] = 1.0 - 1.0 / norm[keep]
    return scale[:, None] * z


def prox(z) -> np.ndarray:
    """Dispatch: scalar threshold for ``(m,)``, group threshold for ``(m, c)``."""
    z = np.asarray(z)
    return prox_l1(z) if z.ndim == 1 else prox_group(z)


def _hessian_apply(h, w, beta, vu, vg):
    r = kernels.apply_d(vu, h, w) - vg
    return vu + 2.0 * beta * kernels.apply_dt(r, h, w), -2.0 * beta * r


def hessian_upper_bound(beta: float) -> float:
    return 1.0 + 2.0 * beta * (LAPLACIAN_BOUND + 1.0)


@lru_cache(maxsize=64)
def _power_iteration(h, w, beta, tol, max_iter):
    p = h * w
    m = h * (w - 1) + w * (h - 1)
    rng = np.random.default_rng(0)
    vu = rng.standard_normal((p, 1))
    vg = rng.standard_normal((m, 1))
    scale = np.sqrt(np.sum(vu**2) + np.sum(vg**2))
    vu /= scale
    vg /= scale
    lam = 0.0
    for _ in range(max_iter):
        yu, yg = _hessian_apply(h, w, beta, vu, vg)
        new = float(np.sum(vu * yu) + np.sum(vg * yg))
        norm = np.sqrt(np.sum(yu**2) + np.sum(yg**2))
        if norm == 0.0:
            return 0.0, True
        vu, vg = yu / norm, yg / norm
        if abs(new - lam) <= tol * abs(new):
            return new, True
        lam = new
    return lam, False


def estimate_hessian_norm(g: LatticeGraph, beta: float, *, tol: float = 1e-10,
                          max_iter: int = 20_000, full_output: bool = False):
    """Spectral norm of the (constant) Hessian of the split objective in ``(u, gamma)``.

    Power iteration on ``[[I + 2b D^T D, -2b D^T], [-2b D, 2b I]]``. If the
    iteration cap is hit, the analytic bound ``1 + 2b (8 + 1)`` is returned
    and a :class:`HessianNormFallbackWarning` is emitted.

    Returns the norm, or ``(norm, converged)`` with ``full_output=True``.
    """
    if beta < 0:
        raise ParameterError(f"beta must be non-negative, got {beta}")
    value, converged = _power_iteration(g.height, g.width, float(beta), tol, max_iter)
    if not converged:
        warnings.warn(
            f"power iteration did not converge in {max_iter} steps; using analytic bound",
            HessianNormFallbackWarning,
            stacklevel=2,
        )
        value = hessian_upper_bound(beta)
    return (value, converged) if full_output else value


def step(x, state: IterState, hp: HyperParams, *, check_descent: bool = False) -> IterState:
    """One iteration from ``state``; returns a new state.

    With ``check_descent`` the split objective is evaluated before and after
    and :class:`StepSizeError` is raised if it grew by more than 1e-12.
    """
    x, g = _check(x, state)
    alpha = hp.resolve_alpha(g)
    gu = grad_u(x, state, hp.beta)
    gg = grad_gamma(state, hp.beta)
    u = state.u - hp.kappa * alpha * gu
    z = state.z - alpha * gg
    gamma = hp.kappa * prox(z)
    new = IterState(u, z, gamma, state.k + 1)
    if check_descent:
        before = split_objective(x, state.u, state.gamma, hp.beta)
        after = split_objective(x, u, gamma, hp.beta)
        if after > before + DESCENT_SLACK:
            raise StepSizeError(
                f"split objective rose from {before!r} to {after!r} at step {new.k}"
            )
    return new


def run_steps(x, state: IterState, hp: HyperParams, n: int) -> IterState:
    """``n`` iterations through the compiled kernel (no snapshots, no checks)."""
    x, g = _check(x, state)
    alpha = hp.resolve_alpha(g)
    xc = x.reshape(g.pixel_count, -1).copy()
    u = state.u.reshape(g.pixel_count, -1).copy()
    z = state.z.reshape(g.edge_count, -1).copy()
    gamma = state.gamma.reshape(g.edge_count, -1).copy()
    steps, _ = kernels.advance(xc, u, z, gamma, g.height, g.width,
                               hp.kappa, alpha, hp.beta, g.edge_count + 1, n)
    return IterState(u.reshape(state.u.shape), z.reshape(state.z.shape),
                     gamma.reshape(state.gamma.shape), state.k + steps)


__all__ = [
    "HyperParams", "IterState", "zero_state", "split_objective", "grad_u", "grad_gamma",
    "prox_l1", "prox_group", "prox", "estimate_hessian_norm", "hessian_upper_bound",
    "step", "run_steps",
]
