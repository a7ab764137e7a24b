"""Cross-space alignment metrics: Jaccard@k, MRR, Cosine, and correlation tools.

Retrieval is brute-force cosine KNN.  The query's own id is part of its
neighborhood and exact similarity ties are broken by ascending id.  For a
shared sample ``s`` the Jaccard score compares the neighbors of the SOURCE
vector of ``s`` in the source space with the neighbors of that same vector
in the target space, so source and target must have equal dimension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import _kernels
from .anchors import select
from .core import (DegenerateVectorError, DimensionMismatchError, EmbeddingSpace, RelRepError,
                   center, fsum_mean, require_valid, unit_rows)
from .relative import RelativeSpace, cosine_matrix, project

REPORT_FIELDS = ("jaccard_mean", "jaccard_std", "mrr_mean", "mrr_std",
                 "cosine_mean", "cosine_std", "k", "n_shared")

_CHUNK = 1024


def _as_space(x) -> EmbeddingSpace:
    if isinstance(x, RelativeSpace):
        return x.as_space()
    return x


@dataclass(frozen=True)
class NeighborList:
    query: str | None
    ids: tuple
    k: int


@dataclass
class AlignmentReport:
    jaccard: np.ndarray
    mrr: np.ndarray
    cosine: np.ndarray
    k: int
    n_shared: int
    jaccard_mean: float
    jaccard_std: float
    mrr_mean: float
    mrr_std: float
    cosine_mean: float
    cosine_std: float
    flags: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, jac, mrr, cos, k, flags=None):
        jac, mrr, cos = (np.asarray(a, dtype=np.float64) for a in (jac, mrr, cos))
        return cls(jac, mrr, cos, int(k), int(jac.size),
                   fsum_mean(jac), float(jac.std()), fsum_mean(mrr), float(mrr.std()),
                   fsum_mean(cos), float(cos.std()), dict(flags or {}))

    def to_dict(self) -> dict:
        d = {f: getattr(self, f) for f in REPORT_FIELDS}
        d["flags"] = self.flags
        return d


class _Index:
    """Unit-normalized rows plus the id rank used for tie-breaking."""

    def __init__(self, space: EmbeddingSpace):
        self.space = space
        self.U = unit_rows(space.matrix, space.ids)
        order = sorted(range(space.n), key=lambda i: space.ids[i])
        self.rank = np.empty(space.n, dtype=np.int64)
        self.rank[order] = np.arange(space.n)
        self.pos = space.index()

    def search(self, Q: np.ndarray, k: int) -> np.ndarray:
        """Top-k row indices for each (already unit) query row."""
        out = []
        for lo in range(0, Q.shape[0], _CHUNK):
            S = Q[lo:lo + _CHUNK] @ self.U.T
            out.append(_kernels.topk_rows(S, k, self.rank))
        return np.vstack(out) if out else np.empty((0, min(k, self.space.n)), dtype=np.int64)


def knn(space, query, k: int) -> NeighborList:
    """The ``k`` ids most cosine-similar to ``query`` (an id of ``space`` or a vector)."""
    space = require_valid(_as_space(space))
    if k < 1:
        raise RelRepError(f"k must be >= 1, got {k}")
    qid = None
    if isinstance(query, str):
        qid = query
        v = space.rows([query])[0]
    else:
        v = np.asarray(query, dtype=np.float64)
    if v.shape != (space.dim,):
        raise DimensionMismatchError(f"query has shape {v.shape}, space dimension {space.dim}")
    q = unit_rows(v[None, :], [qid or "query"], "query")
    idx = _Index(space).search(q, k)[0]
    return NeighborList(qid, tuple(space.ids[i] for i in idx), int(k))


def _check_pair(source, target):
    source, target = _as_space(source), _as_space(target)
    require_valid(source)
    require_valid(target)
    if source.dim != target.dim:
        raise DimensionMismatchError(
            f"dimension mismatch: source has {source.dim}, target {target.dim}; "
            "absolute spaces of different width are not comparable")
    return source, target


def shared_ids(source, target) -> list[str]:
    tgt = set(_as_space(target).ids)
    return [s for s in _as_space(source).ids if s in tgt]


def _per_sample(source, target, ids, k):
    """Jaccard, MRR and Cosine arrays for the given shared ids."""
    si, ti = _Index(source), _Index(target)
    for s in ids:
        if s not in si.pos or s not in ti.pos:
            raise RelRepError(f"id {s!r} is not present in both spaces")
    Xs = si.U[[si.pos[s] for s in ids]]
    Ys = ti.U[[ti.pos[s] for s in ids]]
    nn_x = si.search(Xs, k)
    nn_y = ti.search(Xs, k)
    jac = np.empty(len(ids))
    mrr = np.zeros(len(ids))
    sids, tids = source.ids, target.ids
    for r, s in enumerate(ids):
        a = {sids[i] for i in nn_x[r]}
        b = [tids[i] for i in nn_y[r]]
        bs = set(b)
        jac[r] = len(a & bs) / len(a | bs)
        if s in bs:
            mrr[r] = 1.0 / (b.index(s) + 1)
    cos = np.clip(np.einsum("ij,ij->i", Xs, Ys), -1.0, 1.0)
    return jac, mrr, cos


def jaccard_at_k(source, target, s: str, k: int) -> float:
    source, target = _check_pair(source, target)
    return float(_per_sample(source, target, [s], k)[0][0])


def mrr(source, target, s: str, k: int) -> float:
    """Reciprocal 1-based rank of ``s`` among target neighbors of its source vector; 0 beyond k."""
    source, target = _check_pair(source, target)
    return float(_per_sample(source, target, [s], k)[1][0])


def cosine_pair(source, target, s: str) -> float:
    source, target = _check_pair(source, target)
    a, b = source.rows([s])[0], target.rows([s])[0]
    if not (np.linalg.norm(a) > 0 and np.linalg.norm(b) > 0):
        raise DegenerateVectorError(f"degenerate vector: zero-norm representation of {s!r}")
    return float(cosine_matrix(a[None], b[None])[0, 0])


def alignment_report(source, target, k: int = 10, ids: Sequence[str] | None = None,
                     flags: dict | None = None) -> AlignmentReport:
    """Per-sample and aggregate Jaccard@k / MRR / Cosine over the shared ids."""
    source, target = _check_pair(source, target)
    ids = shared_ids(source, target) if ids is None else list(ids)
    if not ids:
        raise RelRepError("source and target share no ids")
    jac, mr, cos = _per_sample(source, target, ids, k)
    return AlignmentReport.from_samples(jac, mr, cos, k, flags)


def relative_alignment_report(source: EmbeddingSpace, target: EmbeddingSpace, m: int,
                              k: int = 10, seeds: Sequence[int] = (0,),
                              strategy: str = "uniform", centered: bool = True,
                              ) -> AlignmentReport:
    """Alignment of two absolute spaces after projecting both on parallel anchors.

    Anchors are drawn from the shared ids of ``source`` once per seed and
    re-embedded in ``target`` by id.  With several seeds the reported mean
    and std are taken across the per-seed means.
    """
    ids = shared_ids(source, target)
    if not ids:
        raise RelRepError("source and target share no ids")
    src, tgt = source.subset(ids), target.subset(ids)
    if centered:
        src, tgt = center(src)[0], center(tgt)[0]
    per_seed = []
    for seed in seeds:
        anchors = select(src, strategy, m, seed)
        rs, rt = project(src, anchors), project(tgt, anchors)
        per_seed.append(alignment_report(rs, rt, k, ids))
    flags = {"centered": centered, "relative": True,
             "anchors": {"strategy": strategy, "m": m, "seeds": list(seeds)}}
    if len(per_seed) == 1:
        rep = per_seed[0]
        rep.flags = flags
        return rep
    means = {f: np.array([getattr(r, f + "_mean") for r in per_seed])
             for f in ("jaccard", "mrr", "cosine")}
    rep = AlignmentReport.from_samples(means["jaccard"], means["mrr"], means["cosine"], k, flags)
    rep.n_shared = len(ids)
    return rep


def latent_similarity_proxy(space, reference) -> float:
    """Mean cosine between the two representations of each sample."""
    space, reference = _check_pair(space, reference)
    if set(space.ids) != set(reference.ids):
        raise RelRepError("latent similarity needs identical id sets")
    a = unit_rows(space.matrix, space.ids)
    b = unit_rows(reference.rows(space.ids), space.ids)
    return fsum_mean(np.clip(np.einsum("ij,ij->i", a, b), -1.0, 1.0))


def pearson(x, y) -> float:
    """Sample Pearson correlation."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size:
        raise RelRepError(f"series lengths differ: {x.size} vs {y.size}")
    if x.size < 2:
        raise RelRepError("pearson needs at least two points")
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(math.fsum(dx * dx)), math.sqrt(math.fsum(dy * dy))
    for s, v in ((sx, x), (sy, y)):
        if s <= 1e-12 * max(1.0, float(np.abs(v).max())) * math.sqrt(v.size):
            raise RelRepError("zero variance: correlation is undefined")
    return float(np.clip(math.fsum(dx * dy) / (sx * sy), -1.0, 1.0))


def self_similarity_correlation(a, b) -> float:
    """Pearson correlation of the pairwise cosine matrices of two spaces (upper triangle)."""
    a, b = _as_space(a), _as_space(b)
    if set(a.ids) != set(b.ids):
        raise RelRepError("self-similarity correlation needs identical id sets")
    if a.n < 3:
        raise RelRepError("self-similarity correlation needs at least 3 samples")
    Ua = unit_rows(a.matrix, a.ids)
    Ub = unit_rows(b.rows(a.ids), a.ids)
    iu = np.triu_indices(a.n, k=1)
    return pearson((Ua @ Ua.T)[iu], (Ub @ Ub.T)[iu])


def cross_space_distance(a, b) -> float:
    """Mean Euclidean distance between corresponding rows of two equal-width spaces."""
    a, b = _check_pair(a, b)
    ids = shared_ids(a, b)
    return fsum_mean(np.linalg.norm(a.rows(ids) - b.rows(ids), axis=1))
