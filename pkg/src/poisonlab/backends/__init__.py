"""Kernel backend selection.

The compiled Cython extension is preferred when it imported cleanly; the
pure-numpy implementation is the fallback. Override with the environment
variable ``POISONLAB_BACKEND=numpy|cython`` (``cython`` raises if the
extension is unavailable).
"""

import os

from . import numpy_backend

_choice = os.environ.get("POISONLAB_BACKEND", "auto")
if _choice not in ("auto", "numpy", "cython"):
    raise ValueError(f"POISONLAB_BACKEND must be auto|numpy|cython, got {_choice!r}")

active_name = "numpy"
_impl = numpy_backend
if _choice in ("auto", "cython"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        active_name = "cython"
    except ImportError:
        if _choice == "cython":
            raise


def get_backend(name: str):
    """Return a backend module by name (for tests and benchmarks)."""
    if name == "numpy":
        return numpy_backend
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


mean_pairwise_distance = _impl.mean_pairwise_distance
mean_pairwise_squared_distance = _impl.mean_pairwise_squared_distance
kde_likelihood = _impl.kde_likelihood
kde_likelihood_grad = _impl.kde_likelihood_grad
beta_ascent = _impl.beta_ascent
