"""Anchor-relative latent representations."""

from .core import (AnchorCorrespondence, AnchorSet, EmbeddingSpace, RelRepError,
                   SelectionConfig, center, l2_norms, validate)
from .relative import RelativeSpace, cosine, jacobian, project, project_quantized

__version__ = "0.1.0"

__all__ = [
    "AnchorCorrespondence", "AnchorSet", "EmbeddingSpace", "RelRepError", "RelativeSpace",
    "SelectionConfig", "center", "cosine", "jacobian", "l2_norms", "project",
    "project_quantized", "validate",
]
