"""Backend dispatch for the inner loops.

The numba backend is used when numba imports; set ``TVPATH_BACKEND=numpy``
to force the pure-numpy path (useful for debugging and for platforms without
an LLVM toolchain). Both backends expose the same functions:

``apply_d``, ``apply_dt``, ``shrink``, ``count_groups``, ``advance``,
``components``, ``component_means``.
"""
import os
import warnings

from . import numpy_impl

_NAMES = ("numba", "numpy")


def get_backend(name):
    """Return the kernel module for ``name`` ('numba' or 'numpy')."""
    if name == "numpy":
        return numpy_impl
    if name == "numba":
        from . import numba_impl
        return numba_impl
    raise ValueError(f"unknown backend {name!r}; expected one of {_NAMES}")


def _select():
    name = os.environ.get("TVPATH_BACKEND", "numba").strip().lower()
    if name not in _NAMES:
        raise ValueError(f"TVPATH_BACKEND={name!r}; expected one of {_NAMES}")
    if name == "numba":
        try:
            return name, get_backend(name)
        except ImportError:
            warnings.warn("numba unavailable, falling back to numpy kernels")
    return "numpy", numpy_impl


BACKEND, _impl = _select()

apply_d = _impl.apply_d
apply_dt = _impl.apply_dt
shrink = _impl.shrink
count_groups = _impl.count_groups
advance = _impl.advance
components = _impl.components
component_means = _impl.component_means
grid_edges = numpy_impl.grid_edges
