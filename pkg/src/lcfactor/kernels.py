"""Batch triangulation kernels with backend selection.

The compiled extension is used when it was built; otherwise the numpy
implementation is used. :data:`BACKEND` names the active one.
"""

from __future__ import annotations

from types import ModuleType

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKEND = "cython" if _ckernels is not None else "python"
AVAILABLE = ("cython", "python") if _ckernels is not None else ("python",)


def get_backend(name: str | None = None) -> ModuleType:
    """Kernel module for ``name`` ("cython" or "python"); default is :data:`BACKEND`."""
    name = BACKEND if name is None else name
    if name == "python":
        return _pykernels
    if name == "cython":
        if _ckernels is None:
            raise ImportError("compiled kernels are not available; rebuild the package")
        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")


def symmedian_batch(anchors, dirs, offsets, rel_tol: float = 1e-10, backend: str | None = None):
    return get_backend(backend).symmedian_batch(anchors, dirs, offsets, rel_tol)


def line_distances(X, anchors, dirs, offsets, backend: str | None = None):
    return get_backend(backend).line_distances(X, anchors, dirs, offsets)
