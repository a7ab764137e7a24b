"""Zero-shot stitching at desk scale.

Two "encoders" produce spaces related by a latent transform: encoder 1 is
a labelled Gaussian-blob dataset, encoder 2 is the same data after a random
rotation/reflection and rescaling (optionally plus bounded distortion).
Linear heads are fitted on encoder 1 and then fed encoder-2 features.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .anchors import select
from .core import AnchorSet, EmbeddingSpace, RelRepError, center
from .metrics import cross_space_distance, latent_similarity_proxy, pearson
from .relative import project, project_quantized
from .transforms import TransformSpec, apply, bounded_distortion

log = logging.getLogger(__name__)

MODES = ("absolute", "relative")


class StitchingError(RelRepError):
    pass


@dataclass(frozen=True, eq=False)
class SyntheticDataset:
    space: EmbeddingSpace
    labels: np.ndarray
    n_classes: int
    centers: np.ndarray
    config: dict


def make_blobs(n_classes: int, per_class: int, d: int, separation: float,
               seed: int = 0, spread: float = 1.0) -> SyntheticDataset:
    """Isotropic Gaussian blobs around random unit directions scaled by ``separation``.

    ``spread`` is the per-coordinate noise standard deviation.
    """
    if min(n_classes, per_class, d) < 1 or not separation > 0:
        raise RelRepError("make_blobs needs positive counts and separation")
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((n_classes, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    centers = separation * dirs
    labels = np.repeat(np.arange(n_classes), per_class)
    X = centers[labels] + spread * rng.standard_normal((labels.size, d))
    width = len(str(labels.size - 1))
    ids = [f"x{i:0{width}d}" for i in range(labels.size)]
    cfg = dict(n_classes=n_classes, per_class=per_class, d=d, separation=separation, seed=seed,
               spread=spread)
    return SyntheticDataset(EmbeddingSpace("blobs", ids, X), labels, n_classes, centers, cfg)


@dataclass(frozen=True, eq=False)
class LinearHead:
    weights: np.ndarray  # (input_dim + 1, output_dim); last row is the bias
    task: str  # classify | reconstruct
    lam: float
    mode: str = "absolute"
    anchor_ids: tuple | None = None

    @property
    def input_dim(self) -> int:
        return self.weights.shape[0] - 1

    def raw(self, features) -> np.ndarray:
        F = np.asarray(features, dtype=np.float64)
        if F.shape[1] != self.input_dim:
            raise StitchingError(
                f"head expects {self.input_dim} input features, got {F.shape[1]}")
        return F @ self.weights[:-1] + self.weights[-1]

    def predict(self, features, mode: str | None = None, anchor_ids=None) -> np.ndarray:
        """Class ids (classify) or reconstructed vectors (reconstruct).

        ``mode`` and ``anchor_ids`` describe the features being fed; a
        mismatch with what the head was trained on raises.
        """
        if mode is not None and mode != self.mode:
            raise StitchingError(f"{self.mode} head fed {mode} features")
        if self.mode == "relative" and anchor_ids is not None \
                and tuple(anchor_ids) != tuple(self.anchor_ids or ()):
            raise StitchingError("relative head fed features built on different anchors")
        out = self.raw(features)
        return out.argmax(axis=1) if self.task == "classify" else out


def _design(F):
    return np.hstack([F, np.ones((F.shape[0], 1))])


def train_head(features, targets, lam: float = 1e-3, task: str | None = None,
               mode: str = "absolute", anchor_ids=None, n_classes: int | None = None
               ) -> LinearHead:
    """Closed-form ridge regression with an unpenalized bias column.

    Solves ``(X^T X + lam P) W = X^T Y`` where ``P`` is the identity with a
    zero in the bias position.

    Integer 1-D targets are one-hot encoded and the head classifies by
    argmax; 2-D targets are regressed directly.
    """
    F = np.asarray(features, dtype=np.float64)
    T = np.asarray(targets)
    if lam < 0:
        raise RelRepError(f"lambda must be >= 0, got {lam}")
    if F.shape[0] != T.shape[0]:
        raise RelRepError(f"{F.shape[0]} feature rows for {T.shape[0]} targets")
    if task is None:
        task = "classify" if T.ndim == 1 else "reconstruct"
    if task == "classify":
        k = int(n_classes if n_classes is not None else T.max() + 1)
        Y = np.zeros((T.size, k))
        Y[np.arange(T.size), T.astype(np.int64)] = 1.0
    else:
        Y = np.asarray(T, dtype=np.float64).reshape(T.shape[0], -1)
    X = _design(F)
    G = X.T @ X
    # the bias row is not penalized, so a huge lambda leaves the class-prior classifier
    G[np.arange(F.shape[1]), np.arange(F.shape[1])] += lam
    if lam == 0 and np.linalg.cond(G) > 1e12:
        raise RelRepError("singular normal equations with lambda=0; use lambda > 0")
    try:
        W = np.linalg.solve(G, X.T @ Y)
    except np.linalg.LinAlgError:
        raise RelRepError("singular normal equations; use lambda > 0") from None
    anchor_ids = None if anchor_ids is None else tuple(anchor_ids)
    return LinearHead(W, task, float(lam), mode, anchor_ids)


def stratified_split(labels: np.ndarray, test_frac: float, seed: int):
    """Train/test index arrays with ``test_frac`` of every class held out."""
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        n_test = int(round(test_frac * idx.size))
        if idx.size > 1:
            n_test = min(max(n_test, 1), idx.size - 1)
        else:
            n_test = 0
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.sort(np.array(train, dtype=np.int64)), np.sort(np.array(test, dtype=np.int64))


@dataclass
class StitchConfig:
    n_classes: int = 10
    per_class: int = 500
    d: int = 128
    separation: float = 8.0
    dataset_seed: int = 0
    transform: str = "orthogonal"  # identity | orthogonal
    transform_seed: int = 1
    scale: float = 3.0
    distortion: float = 0.0
    distortion_seed: int = 2
    strategy: str = "uniform"
    m: int = 256
    anchor_seed: int = 3
    lam: float = 1e-3
    test_frac: float = 0.2
    split_seed: int = 4
    center: bool = False
    k: int = 10

    @classmethod
    def from_dict(cls, d: dict) -> "StitchConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise RelRepError(f"unknown stitch config keys: {sorted(unknown)}")
        return cls(**d)

    def to_dict(self) -> dict:
        return asdict(self)


def _transform(cfg: StitchConfig, d: int) -> TransformSpec:
    if cfg.transform == "identity":
        return TransformSpec.identity()
    if cfg.transform == "orthogonal":
        return TransformSpec.random(d, cfg.transform_seed, cfg.scale)
    raise RelRepError(f"unknown transform {cfg.transform!r}")


@dataclass
class _Setup:
    data: SyntheticDataset
    x1: EmbeddingSpace
    x2: EmbeddingSpace
    train: np.ndarray
    test: np.ndarray
    anchors: AnchorSet
    spec: TransformSpec


def _setup(cfg: StitchConfig, data: SyntheticDataset | None = None) -> _Setup:
    data = data or make_blobs(cfg.n_classes, cfg.per_class, cfg.d, cfg.separation,
                              cfg.dataset_seed)
    x1 = data.space
    spec = _transform(cfg, x1.dim)
    x2 = apply(x1, spec, "encoder2")
    if cfg.distortion > 0:
        x2 = bounded_distortion(x2, cfg.distortion, cfg.distortion_seed, "encoder2")
    if cfg.center:
        x1, x2 = center(x1)[0], center(x2)[0]
    train, test = stratified_split(data.labels, cfg.test_frac, cfg.split_seed)
    # anchors come from encoder-1 training samples; the same ids are reused in encoder 2
    pool = x1.subset([x1.ids[i] for i in train])
    picked = select(pool, cfg.strategy, cfg.m, cfg.anchor_seed)
    anchors = AnchorSet.from_ids(x1, picked.ids, picked.config)
    return _Setup(data, x1, x2, train, test, anchors, spec)


def _features(space: EmbeddingSpace, mode: str, anchors: AnchorSet) -> np.ndarray:
    if mode == "absolute":
        return space.matrix
    return project(space, anchors).matrix


def _base_report(cfg, s: _Setup) -> dict:
    return {"config": cfg.to_dict(), "anchor_ids": list(s.anchors.ids),
            "n_train": int(s.train.size), "n_test": int(s.test.size),
            "transform": {"kind": s.spec.kind, "seed": s.spec.seed, "scale": s.spec.scale}}


def stitch_classification(cfg: StitchConfig, data: SyntheticDataset | None = None) -> dict:
    """Accuracy of encoder-1 heads on encoder-1 (non-stitched) and encoder-2 (stitched) test features."""
    s = _setup(cfg, data)
    y = s.data.labels
    report = _base_report(cfg, s)
    report["task"] = "classification"
    report["chance"] = 1.0 / s.data.n_classes
    for mode in MODES:
        f1 = _features(s.x1, mode, s.anchors)
        f2 = _features(s.x2, mode, s.anchors)
        head = train_head(f1[s.train], y[s.train], cfg.lam, "classify", mode,
                          s.anchors.ids if mode == "relative" else None, s.data.n_classes)
        ids = s.anchors.ids if mode == "relative" else None
        p1 = head.predict(f1[s.test], mode, ids)
        p2 = head.predict(f2[s.test], mode, ids)
        report[mode] = {
            "non_stitched": float(np.mean(p1 == y[s.test])),
            "stitched": float(np.mean(p2 == y[s.test])),
            "prediction_agreement": float(np.mean(p1 == p2)),
        }
    log.info("classification: abs %s rel %s", report["absolute"], report["relative"])
    return report


def stitch_reconstruction(cfg: StitchConfig, data: SyntheticDataset | None = None) -> dict:
    """MSE of heads that map features back to encoder-1 absolute coordinates."""
    s = _setup(cfg, data)
    target = s.x1.matrix
    report = _base_report(cfg, s)
    report["task"] = "reconstruction"
    for mode in MODES:
        f1 = _features(s.x1, mode, s.anchors)
        f2 = _features(s.x2, mode, s.anchors)
        ids = s.anchors.ids if mode == "relative" else None
        head = train_head(f1[s.train], target[s.train], cfg.lam, "reconstruct", mode, ids)
        truth = target[s.test]
        r1 = head.predict(f1[s.test], mode, ids)
        r2 = head.predict(f2[s.test], mode, ids)
        report[mode] = {
            "non_stitched": float(np.mean((r1 - truth) ** 2)),
            "stitched": float(np.mean((r2 - truth) ** 2)),
        }
    log.info("reconstruction: abs %s rel %s", report["absolute"], report["relative"])
    return report


def anchor_sweep(cfg: StitchConfig, ms=(4, 16, 64, 256)) -> dict:
    """Stitched relative accuracy as a function of the anchor count, encoder fixed."""
    data = make_blobs(cfg.n_classes, cfg.per_class, cfg.d, cfg.separation, cfg.dataset_seed)
    out = {}
    for m in ms:
        rep = stitch_classification(replace(cfg, m=int(m)), data)
        out[int(m)] = rep["relative"]
    return out


@dataclass
class ProxyConfig:
    n_models: int = 50
    noise_grid: list = field(default_factory=lambda: [round(0.05 * i, 2) for i in range(11)])
    n_classes: int = 10
    per_class: int = 500
    d: int = 12
    separation: float = 4.0
    dataset_seed: int = 0
    model_seed: int = 100
    scale_range: tuple = (0.5, 4.0)
    strategy: str = "uniform"
    m: int = 24
    anchor_seed: int = 3
    lam: float = 1e-3
    test_frac: float = 0.5
    split_seed: int = 4

    @classmethod
    def from_dict(cls, d: dict) -> "ProxyConfig":
        unknown = set(d) - set(cls.__dataclass_fields__)
        if unknown:
            raise RelRepError(f"unknown proxy config keys: {sorted(unknown)}")
        d = dict(d)
        if "scale_range" in d:
            d["scale_range"] = tuple(d["scale_range"])
        return cls(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["scale_range"] = list(self.scale_range)
        return d


def proxy_experiment(cfg: ProxyConfig) -> dict:
    """Stitched accuracy vs. latent similarity over a family of degraded encoders.

    Model i is the reference encoder under its own random rotation and
    rescaling followed by bounded distortion at ``noise_grid[i % len]``.
    The reference relative head is evaluated on each model's relative test
    features, and the mean cosine between each model's relative space and the
    reference's is the proxy.
    """
    data = make_blobs(cfg.n_classes, cfg.per_class, cfg.d, cfg.separation, cfg.dataset_seed)
    ref = data.space
    y = data.labels
    train, test = stratified_split(y, cfg.test_frac, cfg.split_seed)
    pool = ref.subset([ref.ids[i] for i in train])
    picked = select(pool, cfg.strategy, cfg.m, cfg.anchor_seed)
    anchors = AnchorSet.from_ids(ref, picked.ids, picked.config)

    rel_ref = project(ref, anchors)
    head = train_head(rel_ref.matrix[train], y[train], cfg.lam, "classify", "relative",
                      anchors.ids, data.n_classes)
    test_ids = [ref.ids[i] for i in test]
    ref_test = rel_ref.as_space().subset(test_ids)

    rng = np.random.default_rng(cfg.model_seed)
    runs = []
    for i in range(cfg.n_models):
        eps = float(cfg.noise_grid[i % len(cfg.noise_grid)])
        seed = int(rng.integers(2**31))
        scale = float(rng.uniform(*cfg.scale_range))
        spec = TransformSpec.random(ref.dim, seed, scale)
        model = bounded_distortion(apply(ref, spec), eps, seed + 1, f"model{i}")
        rel = project(model, anchors)
        pred = head.predict(rel.matrix[test], "relative", anchors.ids)
        acc = float(np.mean(pred == y[test]))
        proxy = latent_similarity_proxy(rel.as_space().subset(test_ids), ref_test)
        runs.append({"model": i, "epsilon": eps, "seed": seed, "scale": scale,
                     "accuracy": acc, "proxy": proxy})

    acc = [r["accuracy"] for r in runs]
    prox = [r["proxy"] for r in runs]
    by_eps = {}
    for r in runs:
        by_eps.setdefault(r["epsilon"], []).append(r)
    curve = [{"epsilon": e,
              "accuracy": float(np.mean([r["accuracy"] for r in rs])),
              "proxy": float(np.mean([r["proxy"] for r in rs]))}
             for e, rs in sorted(by_eps.items())]
    return {"task": "proxy", "config": cfg.to_dict(), "runs": runs, "by_epsilon": curve,
            "pearson": pearson(acc, prox)}


def quantization_experiment(thresholds=(0.0, 1.0, 1.5, 2.0), epsilon: float = 0.05,
                            n_classes: int = 20, per_class: int = 25, d: int = 16,
                            separation: float = 10.0, spread: float = 0.1, m: int = 50,
                            seed: int = 0) -> dict:
    """Mean cross-space relative distance between a space and its distorted copy, per threshold.

    The copy is a random rotation/reflection (no rescaling, since the
    merging threshold is an absolute distance) followed by bounded
    distortion.  Lower scores mean more similar relative spaces.
    """
    data = make_blobs(n_classes, per_class, d, separation, seed, spread)
    x = data.space
    spec = TransformSpec.random(d, seed + 1)
    y = bounded_distortion(apply(x, spec), epsilon, seed + 2, "distorted")
    anchors = select(x, "uniform", m, seed + 3)
    scores = {}
    for t in thresholds:
        rx = project_quantized(x, anchors, float(t))
        ry = project_quantized(y, anchors, float(t))
        scores[float(t)] = cross_space_distance(rx, ry)
    return {"task": "quantization", "epsilon": epsilon, "scores": scores,
            "config": dict(data.config, m=m)}
