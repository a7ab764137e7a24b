"""Hot inner loops with two interchangeable backends.

The numba backend is used when numba imports cleanly; set
``RELREP_BACKEND=numpy`` to force the pure-numpy path.  The flag is read on
every call so tests can switch backends with ``monkeypatch.setenv``.
``RELREP_NUM_THREADS`` caps numba's thread pool.
"""

import os

import numpy as np

from . import _numpy

try:
    from . import _numba
except ImportError:  # pragma: no cover - numba is optional
    _numba = None

BACKENDS = ("numba", "numpy")


def available_backends():
    return [b for b in BACKENDS if b == "numpy" or _numba is not None]


def backend():
    """Name of the backend selected by the environment."""
    name = os.environ.get("RELREP_BACKEND", "").strip().lower()
    if not name:
        return "numba" if _numba is not None else "numpy"
    if name not in BACKENDS:
        raise ValueError(f"RELREP_BACKEND must be one of {BACKENDS}, got {name!r}")
    if name == "numba" and _numba is None:
        raise ImportError("RELREP_BACKEND=numba but numba is not importable")
    return name


def _impl():
    if backend() == "numba":
        threads = os.environ.get("RELREP_NUM_THREADS")
        if threads:
            import numba

            numba.set_num_threads(int(threads))
        return _numba
    return _numpy


def fps_order(X, m, start):
    """Greedy max-min selection of ``m`` rows of ``X`` beginning at ``start``.

    Squared Euclidean distances are used; ties go to the lowest index.
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    return _impl().fps_order(X, int(m), int(start))


def nearest_center(X, C):
    """Index of the nearest row of ``C`` for each row of ``X`` and its squared distance."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    C = np.ascontiguousarray(C, dtype=np.float64)
    return _impl().nearest_center(X, C)


def topk_rows(S, k, rank):
    """Per-row top-``k`` column indices of ``S``.

    Order is descending value, then ascending ``rank[j]`` for exact ties.
    """
    S = np.ascontiguousarray(S, dtype=np.float64)
    rank = np.ascontiguousarray(rank, dtype=np.int64)
    k = min(int(k), S.shape[1])
    return _impl().topk_rows(S, k, rank)
