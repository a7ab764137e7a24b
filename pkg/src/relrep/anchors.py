"""Seeded anchor selection: uniform, farthest-point, k-means and top-k frequency."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .core import (AnchorSet, EmbeddingSpace, InsufficientSamplesError, RelRepError,
                   SelectionConfig, center, require_valid)

STRATEGIES = ("uniform", "fps", "kmeans", "topk")
DEFAULT_TOPK_SKIP = 400

KMEANS_TOL = 1e-8
KMEANS_MAX_ITER = 300


def _check_m(space, m, skip=0):
    if m < 1:
        raise RelRepError(f"anchor count must be >= 1, got {m}")
    if m + skip > space.n:
        raise InsufficientSamplesError(
            f"insufficient samples: need {m + skip} ({m} anchors + {skip} skipped), "
            f"space has {space.n}")


def select_uniform(space: EmbeddingSpace, m: int, seed: int = 0) -> AnchorSet:
    _check_m(space, m)
    rng = np.random.default_rng(seed)
    idx = rng.choice(space.n, size=m, replace=False)
    return AnchorSet.internal(space, idx, SelectionConfig("uniform", m, seed))


def select_fps(space: EmbeddingSpace, m: int, seed: int = 0) -> AnchorSet:
    """Farthest point sampling.

    Starts from the row of largest norm after centering (lowest index on
    ties), then repeatedly adds the sample farthest from the current
    selection.  ``seed`` is recorded but does not influence the result.
    """
    _check_m(space, m)
    X, _ = center(space)
    norms = np.einsum("ij,ij->i", X.matrix, X.matrix)
    start = int(np.argmax(norms))
    order = _kernels.fps_order(X.matrix, m, start)
    return AnchorSet.internal(space, order, SelectionConfig("fps", m, seed))


def kmeans_plus_plus(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding; returns the indices of the initial centers."""
    n = X.shape[0]
    chosen = [int(rng.integers(n))]
    _, d2 = _kernels.nearest_center(X, X[chosen])
    for _ in range(1, k):
        total = d2.sum()
        if total > 0:
            nxt = int(rng.choice(n, p=d2 / total))
        else:
            # all remaining mass is on duplicates of chosen centers
            free = np.setdiff1d(np.arange(n), chosen)
            nxt = int(rng.choice(free))
        chosen.append(nxt)
        _, dn = _kernels.nearest_center(X, X[nxt:nxt + 1])
        d2 = np.minimum(d2, dn)
    return np.asarray(chosen, dtype=np.int64)


def lloyd(X: np.ndarray, centers: np.ndarray, tol: float = KMEANS_TOL,
          max_iter: int = KMEANS_MAX_ITER):
    """Lloyd iterations until the largest centroid shift is below ``tol``.

    Empty clusters keep their previous centroid.
    """
    C = np.array(centers, dtype=np.float64)
    k = C.shape[0]
    labels = None
    for it in range(max_iter):
        labels, _ = _kernels.nearest_center(X, C)
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(C)
        np.add.at(sums, labels, X)
        new = C.copy()
        nz = counts > 0
        new[nz] = sums[nz] / counts[nz, None]
        shift = np.sqrt(((new - C) ** 2).sum(axis=1)).max()
        C = new
        if shift < tol:
            break
    labels, _ = _kernels.nearest_center(X, C)
    return C, labels, it + 1


def kmeans(X: np.ndarray, k: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    init = kmeans_plus_plus(X, k, rng)
    return lloyd(X, X[init])


def select_kmeans(space: EmbeddingSpace, m: int, seed: int = 0) -> AnchorSet:
    """Samples nearest to the k-means centroids (K = m, Euclidean).

    When two centroids share a nearest sample, the later centroid takes its
    next-nearest unused sample instead.
    """
    _check_m(space, m)
    X = space.matrix
    C, _, _ = kmeans(X, m, seed)
    used = np.zeros(space.n, dtype=bool)
    picks = []
    for c in range(m):
        d2 = ((X - C[c]) ** 2).sum(axis=1)
        # stable sort keeps the lowest index first on equal distances
        for i in np.argsort(d2, kind="stable"):
            if not used[i]:
                used[i] = True
                picks.append(int(i))
                break
    return AnchorSet.internal(space, picks, SelectionConfig("kmeans", m, seed))


def select_topk(space: EmbeddingSpace, frequencies: dict, m: int,
                skip: int = DEFAULT_TOPK_SKIP) -> AnchorSet:
    """The ``m`` most frequent ids after dropping the ``skip`` most frequent."""
    _check_m(space, m, skip)
    missing = [s for s in space.ids if s not in frequencies]
    if missing:
        raise RelRepError(f"no frequency for id {missing[0]!r}")
    ranked = sorted(space.ids, key=lambda s: (-frequencies[s], s))
    chosen = ranked[skip:skip + m]
    return AnchorSet.from_ids(space, chosen, SelectionConfig("topk", m, 0, skip))


def select(space: EmbeddingSpace, strategy: str, m: int, seed: int = 0,
           frequencies: dict | None = None, skip: int = DEFAULT_TOPK_SKIP) -> AnchorSet:
    require_valid(space)
    if strategy == "uniform":
        return select_uniform(space, m, seed)
    if strategy == "fps":
        return select_fps(space, m, seed)
    if strategy == "kmeans":
        return select_kmeans(space, m, seed)
    if strategy == "topk":
        if frequencies is None:
            raise RelRepError("topk selection needs a frequency table")
        return select_topk(space, frequencies, m, skip)
    raise RelRepError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")
