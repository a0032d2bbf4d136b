"""Exact balanced-transport backend selection.

The compiled simplex kernel (``topotrack.transport._simplex``) is preferred;
the NumPy implementation is the fallback. Set ``TOPOTRACK_PURE_PYTHON=1`` to
force the fallback, e.g. for benchmarking.
"""

from __future__ import annotations

import os

import numpy as np

from . import _simplex_py

_FORCE_PURE = os.environ.get("TOPOTRACK_PURE_PYTHON", "").strip() in ("1", "true", "yes")

if not _FORCE_PURE:
    try:
        from . import _simplex  # compiled extension

        _BACKEND = "compiled"
    except ImportError:
        _simplex = None
        _BACKEND = "python"
else:
    _simplex = None
    _BACKEND = "python"


def backend_name() -> str:
    return _BACKEND


def solve_transport(a: np.ndarray, b: np.ndarray, cost: np.ndarray, basis=None):
    """Exact solution of min <cost, X> over {X >= 0, X1 = a, X^T 1 = b}.

    ``basis`` is an optional in/out boolean array holding a spanning-tree
    basis; repeated solves with the same marginals warm-start from it.
    """
    if _BACKEND == "compiled":
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        cost = np.ascontiguousarray(cost, dtype=np.float64)
        return _simplex.solve_transport(a, b, cost, basis)
    return _simplex_py.solve_transport(a, b, cost, basis)


def solve_transport_python(a, b, cost, basis=None):
    """Always use the NumPy fallback (for benchmarks and cross-checks)."""
    return _simplex_py.solve_transport(a, b, cost, basis)
