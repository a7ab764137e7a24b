"""Anchor-relative cosine representations.

A sample ``x`` with absolute embedding ``e`` is represented by the vector of
cosine similarities between ``e`` and each anchor embedding, in anchor
order.  Rotations, reflections and positive rescaling applied to samples and
anchors together leave that vector unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import fcluster, linkage

from .core import (AnchorSet, DegenerateVectorError, DimensionMismatchError, EmbeddingSpace,
                   RelRepError, require_valid, unit_rows)


@dataclass(frozen=True, eq=False)
class RelativeSpace:
    ids: tuple
    matrix: np.ndarray
    anchors: AnchorSet
    threshold: float = 0.0
    name: str = "relative"

    @property
    def anchor_ids(self) -> tuple:
        return self.anchors.ids

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def as_space(self, name: str | None = None) -> EmbeddingSpace:
        return EmbeddingSpace(name or self.name, self.ids, self.matrix)


def cosine(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"shapes {a.shape} and {b.shape} differ")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if not (na > 0 and nb > 0):
        raise DegenerateVectorError("degenerate vector: cosine of a zero-norm vector")
    return float(np.clip(np.dot(a / na, b / nb), -1.0, 1.0))


def cosine_matrix(X, A, x_ids=None, a_ids=None) -> np.ndarray:
    """All pairwise cosines between rows of ``X`` and rows of ``A``, clipped to [-1, 1]."""
    if X.shape[1] != A.shape[1]:
        raise DimensionMismatchError(
            f"dimension mismatch: samples have {X.shape[1]}, anchors {A.shape[1]}")
    S = unit_rows(X, x_ids, "sample") @ unit_rows(A, a_ids, "anchor").T
    return np.clip(S, -1.0, 1.0, out=S)


def _self_columns(space, anchors):
    """(row, column) of each internal anchor inside the projected space."""
    if anchors.kind != "internal":
        return None
    idx = space.index()
    pairs = [(idx[s], j) for j, s in enumerate(anchors.ids) if s in idx]
    if not pairs:
        return None
    return tuple(np.array(p) for p in zip(*pairs))


def project(space: EmbeddingSpace, anchors: AnchorSet) -> RelativeSpace:
    require_valid(space)
    A = anchors.resolve(space)
    S = cosine_matrix(space.matrix, A, space.ids, anchors.ids)
    # cosine of a vector with itself is exactly 1; the matmul only gets within an ulp
    pos = _self_columns(space, anchors)
    if pos is not None:
        S[pos] = 1.0
    S.setflags(write=False)
    return RelativeSpace(space.ids, S, anchors, 0.0, f"{space.name}:relative")


def average_linkage_clusters(X: np.ndarray, t: float) -> np.ndarray:
    """Flat cluster labels from average-linkage (Euclidean) merging while distance <= t."""
    if X.shape[0] == 1:
        return np.zeros(1, dtype=np.int64)
    Z = linkage(X, method="average", metric="euclidean")
    return fcluster(Z, t=t, criterion="distance").astype(np.int64) - 1


def quantize(X: np.ndarray, t: float) -> np.ndarray:
    """Replace every row by the centroid of its cluster."""
    labels = average_linkage_clusters(X, t)
    k = labels.max() + 1
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    cent = sums / np.bincount(labels, minlength=k)[:, None]
    return cent[labels]


def project_quantized(space: EmbeddingSpace, anchors: AnchorSet, t: float) -> RelativeSpace:
    """Projection after vector-quantizing samples and anchors jointly.

    Samples and (external) anchors are clustered together with average
    linkage at distance threshold ``t``; each vector is replaced by its
    cluster centroid before the cosine projection.  ``t = 0`` is plain
    :func:`project`.
    """
    if t < 0:
        raise RelRepError(f"threshold must be >= 0, got {t}")
    if t == 0:
        return project(space, anchors)
    require_valid(space)
    A = anchors.resolve(space)
    if A.shape[1] != space.dim:
        raise DimensionMismatchError(
            f"dimension mismatch: samples have {space.dim}, anchors {A.shape[1]}")
    n = space.n
    if anchors.kind == "internal":
        Xq = quantize(space.matrix, t)
        idx = space.index()
        Aq = Xq[[idx[s] for s in anchors.ids]]
    else:
        U = quantize(np.vstack([space.matrix, A]), t)
        Xq, Aq = U[:n], U[n:]
    try:
        S = cosine_matrix(Xq, Aq, space.ids, anchors.ids)
    except DegenerateVectorError as e:
        raise DegenerateVectorError(f"zero-norm cluster centroid at t={t}: {e}") from None
    S.setflags(write=False)
    return RelativeSpace(space.ids, S, anchors, float(t), f"{space.name}:relative@{t:g}")


def jacobian(e, anchors, space: EmbeddingSpace | None = None) -> np.ndarray:
    """Derivative of the relative vector of ``e`` with respect to ``e``.

    Row j is ``a_j / (|e| |a_j|) - (e . a_j) e / (|e|^3 |a_j|)``.
    ``anchors`` is an (m, d) array or an :class:`AnchorSet` (resolved in
    ``space`` when internal).
    """
    e = np.asarray(e, dtype=np.float64)
    A = anchors.resolve(space) if isinstance(anchors, AnchorSet) else np.atleast_2d(
        np.asarray(anchors, dtype=np.float64))
    if A.shape[1] != e.shape[0]:
        raise DimensionMismatchError(f"anchors have dimension {A.shape[1]}, e has {e.shape[0]}")
    ne = np.linalg.norm(e)
    na = np.linalg.norm(A, axis=1)
    if not ne > 0 or not np.all(na > 0):
        raise DegenerateVectorError("degenerate vector: zero-norm input to jacobian")
    dots = A @ e
    return A / (ne * na)[:, None] - np.outer(dots / (ne ** 3 * na), e)
