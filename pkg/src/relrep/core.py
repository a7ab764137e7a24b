"""Embedding-space containers, anchor references and normalization helpers."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

log = logging.getLogger(__name__)


class RelRepError(ValueError):
    """Base class for contract violations raised by this package."""


class InvalidSpaceError(RelRepError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


class DegenerateVectorError(RelRepError):
    pass


class DimensionMismatchError(RelRepError):
    pass


class InsufficientSamplesError(RelRepError):
    pass


def _frozen(a):
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class EmbeddingSpace:
    """A named matrix of absolute embeddings, one row per identified sample.

    The container only enforces shape consistency.  Duplicate ids and
    non-finite values are representable so that :func:`validate` can report
    them; every consumer calls :func:`require_valid` first.
    """

    name: str
    ids: tuple
    matrix: np.ndarray

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        M = _frozen(self.matrix)
        if M.ndim == 1 and len(ids) == 1:
            M = _frozen(M[None, :])
        if M.ndim != 2:
            raise InvalidSpaceError([f"matrix must be 2-D, got shape {M.shape}"])
        if M.shape[0] != len(ids):
            raise InvalidSpaceError(
                [f"{len(ids)} ids for {M.shape[0]} rows"])
        object.__setattr__(self, "ids", ids)
        object.__setattr__(self, "matrix", M)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self):
        return self.n

    def index(self) -> dict:
        """Map id -> row index (first occurrence)."""
        out = {}
        for i, s in enumerate(self.ids):
            out.setdefault(s, i)
        return out

    def rows(self, ids: Iterable[str]) -> np.ndarray:
        idx = self.index()
        try:
            return self.matrix[[idx[s] for s in ids]]
        except KeyError as e:
            raise RelRepError(f"id {e.args[0]!r} not in space {self.name!r}") from None

    def subset(self, ids: Sequence[str], name: str | None = None) -> "EmbeddingSpace":
        ids = list(ids)
        return EmbeddingSpace(name or self.name, ids, self.rows(ids))

    def with_matrix(self, matrix, name: str | None = None) -> "EmbeddingSpace":
        return EmbeddingSpace(name or self.name, self.ids, matrix)

    def __eq__(self, other):
        if not isinstance(other, EmbeddingSpace):
            return NotImplemented
        return (self.ids == other.ids and self.matrix.shape == other.matrix.shape
                and np.array_equal(self.matrix, other.matrix))

    __hash__ = None


@dataclass(frozen=True)
class Diagnostic:
    kind: str  # duplicate_id | non_finite | ragged_row | empty
    message: str
    id: str | None = None
    row: int | None = None
    col: int | None = None

    def __str__(self):
        return self.message


def validate(space, ids=None) -> list[Diagnostic]:
    """Every violation found in a space; an empty list means valid.

    ``space`` may be an :class:`EmbeddingSpace` or raw rows (a list of
    sequences, possibly ragged) given together with ``ids``.
    """
    if isinstance(space, EmbeddingSpace):
        ids, rows = space.ids, list(space.matrix)
    else:
        rows = list(space)
        ids = [str(i) for i in (ids if ids is not None else range(len(rows)))]

    diags = []
    if len(rows) == 0:
        diags.append(Diagnostic("empty", "space has no rows"))
    if len(ids) != len(rows):
        diags.append(Diagnostic("ragged_row", f"{len(ids)} ids for {len(rows)} rows"))

    seen = {}
    for i, s in enumerate(ids):
        if s in seen:
            if seen[s] == 1:
                diags.append(Diagnostic("duplicate_id", f"duplicate id {s!r}", id=s, row=i))
            seen[s] += 1
        else:
            seen[s] = 1

    width = None
    for r, row in enumerate(rows):
        row = np.asarray(row, dtype=np.float64).ravel()
        if width is None:
            width = row.size
            if width == 0:
                diags.append(Diagnostic("ragged_row", "rows have zero width", row=r))
        elif row.size != width:
            diags.append(Diagnostic(
                "ragged_row", f"row {r} has {row.size} entries, expected {width}", row=r))
        for c in np.flatnonzero(~np.isfinite(row)):
            diags.append(Diagnostic(
                "non_finite", f"non-finite value {row[c]} at (row {r}, col {c})",
                id=ids[r] if r < len(ids) else None, row=r, col=int(c)))
    return diags


def require_valid(space: EmbeddingSpace) -> EmbeddingSpace:
    diags = validate(space)
    if diags:
        raise InvalidSpaceError(diags)
    return space


def center(space: EmbeddingSpace) -> tuple[EmbeddingSpace, np.ndarray]:
    """Subtract the per-dimension mean; returns the centered space and the mean."""
    mean = space.matrix.mean(axis=0)
    out = space.matrix - mean
    log.debug("centered space %r (|mean|=%.3g)", space.name, float(np.linalg.norm(mean)))
    return space.with_matrix(out), mean


def l2_norms(space: EmbeddingSpace) -> np.ndarray:
    return np.linalg.norm(space.matrix, axis=1)


def unit_rows(M: np.ndarray, ids: Sequence[str] | None = None, what: str = "row") -> np.ndarray:
    """Rows scaled to unit length; zero rows raise naming the offending id."""
    norms = np.linalg.norm(M, axis=1)
    bad = np.flatnonzero(~(norms > 0))
    if bad.size:
        i = int(bad[0])
        name = ids[i] if ids is not None else i
        raise DegenerateVectorError(f"degenerate vector: zero-norm {what} {name!r}")
    return M / norms[:, None]


@dataclass(frozen=True)
class SelectionConfig:
    strategy: str
    m: int
    seed: int = 0
    skip: int = 0

    def to_dict(self):
        return {"strategy": self.strategy, "m": self.m, "seed": self.seed, "skip": self.skip}


@dataclass(frozen=True, eq=False)
class AnchorSet:
    """Ordered anchors.

    ``internal`` anchors are row indices into the host space they were
    selected from; ``external`` anchors carry their own vectors (OOD anchors).
    """

    kind: str
    indices: tuple = ()
    ids: tuple = ()
    vectors: EmbeddingSpace | None = None
    config: SelectionConfig | None = None

    def __post_init__(self):
        if self.kind not in ("internal", "external"):
            raise RelRepError(f"unknown anchor kind {self.kind!r}")
        if self.kind == "external":
            if self.vectors is None:
                raise RelRepError("external anchors need vectors")
            object.__setattr__(self, "ids", tuple(self.vectors.ids))
        else:
            idx = tuple(int(i) for i in self.indices)
            if len(set(idx)) != len(idx):
                raise RelRepError("anchor indices must be distinct")
            object.__setattr__(self, "indices", idx)
            object.__setattr__(self, "ids", tuple(str(s) for s in self.ids))
        if len(self) < 1:
            raise RelRepError("anchor set is empty")

    @classmethod
    def internal(cls, space: EmbeddingSpace, indices, config=None) -> "AnchorSet":
        indices = [int(i) for i in indices]
        for i in indices:
            if not 0 <= i < space.n:
                raise RelRepError(f"anchor index {i} out of range for {space.n} samples")
        return cls("internal", tuple(indices), tuple(space.ids[i] for i in indices),
                   config=config)

    @classmethod
    def from_ids(cls, space: EmbeddingSpace, ids: Sequence[str], config=None) -> "AnchorSet":
        idx = space.index()
        missing = [s for s in ids if s not in idx]
        if missing:
            raise RelRepError(f"anchor id {missing[0]!r} not in space {space.name!r}")
        return cls.internal(space, [idx[s] for s in ids], config)

    @classmethod
    def external(cls, vectors: EmbeddingSpace, config=None) -> "AnchorSet":
        return cls("external", vectors=vectors, config=config)

    def __len__(self):
        return len(self.ids)

    def resolve(self, space: EmbeddingSpace | None) -> np.ndarray:
        """Anchor vectors (m x d) as seen in ``space``.

        Internal anchors are looked up by id, so the same AnchorSet re-embeds
        parallel anchors in any space sharing those ids.
        """
        if self.kind == "external":
            A = self.vectors.matrix
            if space is not None and A.shape[1] != space.dim:
                raise DimensionMismatchError(
                    f"anchors have dimension {A.shape[1]}, space has {space.dim}")
            return A
        if space is None:
            raise RelRepError("internal anchors need a host space")
        if len(space.ids) > max(self.indices) and all(
                space.ids[i] == s for i, s in zip(self.indices, self.ids)):
            return space.matrix[list(self.indices)]
        return space.rows(self.ids)

    def to_dict(self):
        d = {"kind": self.kind, "ids": list(self.ids)}
        if self.config is not None:
            d["config"] = self.config.to_dict()
        return d


@dataclass(frozen=True)
class AnchorCorrespondence:
    """Parallel anchors: slot j of every space names corresponding samples."""

    slots: dict = field(default_factory=dict)

    def __post_init__(self):
        slots = {k: tuple(str(s) for s in v) for k, v in self.slots.items()}
        lengths = {len(v) for v in slots.values()}
        if len(lengths) > 1:
            raise RelRepError(f"parallel anchor lists differ in length: {sorted(lengths)}")
        object.__setattr__(self, "slots", slots)

    @property
    def m(self) -> int:
        return len(next(iter(self.slots.values()))) if self.slots else 0

    def anchors_for(self, name: str, space: EmbeddingSpace) -> AnchorSet:
        return AnchorSet.from_ids(space, self.slots[name])


def fsum_mean(x) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    return math.fsum(x) / x.size
