"""Synthetic latent-space transforms standing in for training stochasticity."""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .core import DimensionMismatchError, EmbeddingSpace, RelRepError


def random_orthogonal(d: int, seed: int = 0) -> np.ndarray:
    """Haar-distributed orthogonal ``d x d`` matrix.

    QR of a Gaussian matrix, with each column of Q multiplied by the sign of
    the matching diagonal entry of R so the distribution is uniform over O(d).
    """
    if d < 1:
        raise RelRepError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    signs = np.sign(np.diag(R))
    signs[signs == 0] = 1.0
    return Q * signs


@dataclass(frozen=True, eq=False)
class TransformSpec:
    """``row -> scale * Q @ row + translation`` (scale, then rotate, then translate)."""

    orthogonal: np.ndarray | None = None
    scale: float = 1.0
    translation: np.ndarray | None = None
    seed: int | None = None
    kind: str = "composite"

    def __post_init__(self):
        if not (np.isfinite(self.scale) and self.scale > 0):
            raise RelRepError(f"scale must be finite and positive, got {self.scale}")
        if self.orthogonal is not None:
            Q = np.asarray(self.orthogonal, dtype=np.float64)
            if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
                raise RelRepError(f"orthogonal part must be square, got {Q.shape}")
            if not np.allclose(Q.T @ Q, np.eye(Q.shape[0]), rtol=0, atol=1e-10):
                raise RelRepError("orthogonal part is not orthogonal")
            object.__setattr__(self, "orthogonal", Q)
        if self.translation is not None:
            object.__setattr__(self, "translation",
                               np.asarray(self.translation, dtype=np.float64).ravel())

    @classmethod
    def identity(cls):
        return cls(kind="identity")

    @classmethod
    def random(cls, d: int, seed: int, scale: float = 1.0, translate: float | None = None):
        """A seeded Haar rotation/reflection with optional scale and constant shift."""
        t = None if not translate else np.full(d, float(translate))
        return cls(random_orthogonal(d, seed), float(scale), t, seed, "composite")

    @classmethod
    def permutation(cls, d: int, seed: int):
        rng = np.random.default_rng(seed)
        return cls(np.eye(d)[rng.permutation(d)], 1.0, None, seed, "permutation")

    @property
    def dim(self):
        if self.orthogonal is not None:
            return self.orthogonal.shape[0]
        if self.translation is not None:
            return self.translation.size
        return None

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seed": self.seed,
            "scale": self.scale,
            "orthogonal": None if self.orthogonal is None else self.orthogonal.tolist(),
            "translation": None if self.translation is None else self.translation.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "TransformSpec":
        return cls(orthogonal=None if d.get("orthogonal") is None else np.array(d["orthogonal"]),
                   scale=float(d.get("scale", 1.0)),
                   translation=None if d.get("translation") is None
                   else np.array(d["translation"]),
                   seed=d.get("seed"), kind=d.get("kind", "composite"))


def apply(space: EmbeddingSpace, spec: TransformSpec, name: str | None = None) -> EmbeddingSpace:
    d = spec.dim
    if d is not None and d != space.dim:
        raise DimensionMismatchError(f"transform has dimension {d}, space {space.dim}")
    X = space.matrix
    if spec.scale != 1.0:
        X = spec.scale * X
    if spec.orthogonal is not None:
        X = X @ spec.orthogonal.T
    if spec.translation is not None:
        X = X + spec.translation
    return space.with_matrix(X, name)


def bounded_distortion(space: EmbeddingSpace, epsilon: float, seed: int = 0,
                       name: str | None = None) -> EmbeddingSpace:
    """Perturb each row by a random vector of norm at most ``epsilon * |row|``.

    Directions are uniform on the sphere; the radius fraction is uniform in [0, 1].
    """
    if epsilon < 0:
        raise RelRepError(f"epsilon must be >= 0, got {epsilon}")
    if epsilon == 0:
        return space.with_matrix(space.matrix, name)
    rng = np.random.default_rng(seed)
    X = space.matrix
    u = rng.standard_normal(X.shape)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    radius = epsilon * np.linalg.norm(X, axis=1) * rng.uniform(0.0, 1.0, X.shape[0])
    return space.with_matrix(X + u * radius[:, None], name)
