"""Total-variation smoothing paths grown from a blank image."""
from .dynamics import (HyperParams, IterState, estimate_hessian_norm, grad_gamma, grad_u, prox,
                       prox_group, prox_l1, run_steps, split_objective, step, zero_state)
from .errors import (DimensionError, HessianNormFallbackWarning, OracleError, ParameterError,
                     StepSizeError)
from .lattice import LatticeGraph, apply_D, apply_D_transpose, build_lattice, lattice_for
from .path import (PathConfig, PathResult, Snapshot, SparsityLevelWarning, default_level,
                   run_path, smooth_to_level)
from .projection import (ComponentPartition, SupportSet, find_components, project,
                         project_support, sparsity_level)
from .spectral import FrequencyMask, band_energy, decompose, expected_spectral_diff

__version__ = "0.1.0"

__all__ = [
    "ComponentPartition", "DimensionError", "FrequencyMask", "HessianNormFallbackWarning",
    "HyperParams", "IterState", "LatticeGraph", "OracleError", "ParameterError", "PathConfig",
    "PathResult", "Snapshot", "SparsityLevelWarning", "StepSizeError", "SupportSet",
    "apply_D", "apply_D_transpose", "band_energy", "build_lattice", "decompose", "default_level",
    "estimate_hessian_norm", "expected_spectral_diff", "find_components", "grad_gamma", "grad_u",
    "lattice_for", "project", "project_support", "prox", "prox_group", "prox_l1", "run_path",
    "run_steps", "smooth_to_level", "sparsity_level", "split_objective", "step", "zero_state",
]
