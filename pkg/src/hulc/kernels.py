"""Hot kernels, compiled when available.

The Cython extension ``hulc._kernels`` is used if it imports; otherwise
(or when ``HULC_PURE_PYTHON`` is set) the pure-Python fallback is used.
``BACKEND`` records which one is active.
"""

import os

import numpy as np

from . import _kernels_py

if os.environ.get("HULC_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"

__all__ = ["BACKEND", "pava"]


def pava(values, weights=None, backend=None):
    """Weighted isotonic (nondecreasing) least-squares fit.

    Pool-adjacent-violators: minimizes ``sum(w * (y - f)**2)`` over
    nondecreasing ``f``.

    Parameters
    ----------
    values : array_like, shape (n,)
    weights : array_like, shape (n,), optional
        Strictly positive; defaults to ones.
    backend : {"cython", "python"}, optional
        Force an implementation (used by tests and the benchmark).

    Returns
    -------
    ndarray, shape (n,)
    """
    y = np.ascontiguousarray(values, dtype=np.float64)
    if y.ndim != 1 or y.size == 0:
        raise ValueError("values must be a non-empty 1-d array")
    if weights is None:
        w = np.ones_like(y)
    else:
        w = np.ascontiguousarray(weights, dtype=np.float64)
        if w.shape != y.shape:
            raise ValueError(f"length mismatch: {y.size} values, {w.size} weights")
        if not np.all(w > 0):
            raise ValueError("weights must be strictly positive")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(w))):
        raise ValueError("values and weights must be finite")
    impl = _impl
    if backend == "python":
        impl = _kernels_py
    elif backend == "cython":
        from . import _kernels as impl
    elif backend is not None:
        raise ValueError(f"unknown backend {backend!r}")
    return impl.pava(y, w)
