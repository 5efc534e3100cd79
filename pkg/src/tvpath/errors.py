"""Exception types raised across the package."""


class DimensionError(ValueError):
    """Array shapes disagree with the lattice or with each other."""


class ParameterError(ValueError):
    """A numeric parameter is outside its admissible range."""


class StepSizeError(RuntimeError):
    """The split objective increased, so the step size is too large."""


class OracleError(RuntimeError):
    """A reference solver failed to converge."""


class HessianNormFallbackWarning(RuntimeWarning):
    """Power iteration did not converge; an analytic upper bound was used."""
