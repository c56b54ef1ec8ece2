"""Linear classifiers for noise identification and sentiment analysis.

Two trainers share the same seeded SGD skeleton:

* one-vs-rest hinge loss (per class: 0.5*||w||^2 + c * sum_i hinge_i),
* class-weighted softmax cross-entropy with L2 term ||W||^2 / (2c),

both with the decaying step size lr_t = lr0 / (1 + t/n) over global step t
and the L2 shrink folded into a scale factor so updates stay sparse.
Training is bit-deterministic given the data order and the seed.

Class weights for cost-sensitive training follow w_c = N / (K * n_c).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTrainingSet,
    Malformed,
    ZeroCount,
)
from .features import SparseVector
from .textcore import NOISE_CLASSES, NoiseLabelSet, SentimentLabel

LINEAR_FORMAT = "noisekit-linear-v1"

SENTIMENT_CLASSES = tuple(label.label for label in SentimentLabel)


class ModelKind(enum.Enum):
    OVR_HINGE = "ovr_hinge"
    SOFTMAX_WEIGHTED = "softmax_weighted"


@dataclass(frozen=True)
class TrainConfig:
    c: float = 1.0
    epochs: int = 20
    learning_rate: float = 0.1
    seed: int = 0
    class_weights: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.c <= 0:
            raise Malformed(f"regularization strength must be > 0, got {self.c}")
        if self.epochs < 1:
            raise Malformed(f"epochs must be >= 1, got {self.epochs}")
        if self.learning_rate <= 0:
            raise Malformed(f"learning rate must be > 0, got {self.learning_rate}")


@dataclass(frozen=True)
class ClassWeights:
    """Per-class loss weights; `exact` keeps the unrounded fractions."""

    values: tuple[float, ...]
    exact: tuple[Fraction, ...] | None = None

    def __post_init__(self):
        if any(v <= 0 for v in self.values):
            raise ZeroCount("class weights must be positive")

    @classmethod
    def uniform(cls, k: int) -> "ClassWeights":
        return cls(values=(1.0,) * k, exact=(Fraction(1),) * k)


def compute_class_weights(counts) -> ClassWeights:
    """Inverse-frequency weights w_c = N / (K * n_c) for K classes of size n_c."""
    counts = [int(c) for c in counts]
    if any(c <= 0 for c in counts):
        raise ZeroCount(f"all class counts must be positive, got {counts}")
    n = sum(counts)
    k = len(counts)
    exact = tuple(Fraction(n, k * c) for c in counts)
    return ClassWeights(values=tuple(float(f) for f in exact), exact=exact)


@dataclass
class LinearModel:
    kind: ModelKind
    class_names: tuple[str, ...]
    weights: np.ndarray  # (n_classes, dim)
    bias: np.ndarray  # (n_classes,)
    train_config: TrainConfig | None = None

    @property
    def dim(self) -> int:
        return self.weights.shape[1]

    def decision_values(self, x: SparseVector) -> np.ndarray:
        if x.nnz and int(x.indices[-1]) >= self.dim:
            raise DimensionMismatch(
                f"feature index {int(x.indices[-1])} outside model dimension {self.dim}"
            )
        if not x.nnz:
            return self.bias.copy()
        return self.weights[:, x.indices] @ x.values + self.bias


def _check_training_inputs(features, labels):
    if len(features) != len(labels):
        raise DimensionMismatch(
            f"{len(features)} feature vectors but {len(labels)} labels"
        )
    if not features:
        raise EmptyTrainingSet("no training samples")


def _feature_dim(features, dim):
    max_idx = -1
    for x in features:
        if x.nnz:
            max_idx = max(max_idx, int(x.indices[-1]))
    if dim is None:
        return max_idx + 1
    if max_idx >= dim:
        raise DimensionMismatch(f"feature index {max_idx} outside dimension {dim}")
    return dim


class _ScaledWeights:
    """Dense (K, D) weights with a multiplicative scale so the L2 shrink is O(1)."""

    def __init__(self, k: int, d: int):
        self.w = np.zeros((k, d), dtype=np.float64)
        self.scale = 1.0

    def shrink(self, factor: float):
        # Extreme learning rates could flip the sign; clamp instead.
        self.scale *= max(factor, 1e-12)
        if self.scale < 1e-9:
            self.w *= self.scale
            self.scale = 1.0

    def dense(self) -> np.ndarray:
        return self.w * self.scale


def train_ovr_hinge(features, labels, config: TrainConfig, dim: int | None = None) -> LinearModel:
    """One independent max-margin binary classifier per noise class.

    Each class minimizes 0.5*||w||^2 + c * sum_i max(0, 1 - y_i (w.x_i + b))
    by seeded stochastic subgradient descent; the classes share the sample
    order so the whole run is deterministic.
    """
    _check_training_inputs(features, labels)
    d = _feature_dim(features, dim)
    n = len(features)
    k = len(NOISE_CLASSES)
    y = np.full((n, k), -1.0)
    for row, label_set in enumerate(labels):
        for j in range(k):
            if label_set.has(j):
                y[row, j] = 1.0

    sw = _ScaledWeights(k, d)
    bias = np.zeros(k, dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    lr0 = config.learning_rate
    step = 0
    for _ in range(config.epochs):
        for i in rng.permutation(n):
            lr = lr0 / (1.0 + step / n)
            step += 1
            x = features[i]
            yi = y[i]
            if x.nnz:
                decision = sw.scale * (sw.w[:, x.indices] @ x.values) + bias
            else:
                decision = bias.copy()
            violated = yi * decision < 1.0
            sw.shrink(1.0 - lr / n)
            if violated.any():
                coeff = (lr * config.c / sw.scale) * yi[violated]
                if x.nnz:
                    sw.w[np.ix_(violated, x.indices)] += coeff[:, None] * x.values[None, :]
                bias[violated] += lr * config.c * yi[violated]
    return LinearModel(
        kind=ModelKind.OVR_HINGE,
        class_names=NOISE_CLASSES,
        weights=sw.dense(),
        bias=bias,
        train_config=config,
    )


def hinge_objective(w: np.ndarray, b: float, features, y, c: float) -> float:
    """Primal objective of one binary hinge classifier (used as a test oracle too)."""
    total = 0.5 * float(np.dot(w, w))
    for x, yi in zip(features, y):
        margin = yi * ((float(w[x.indices] @ x.values) if x.nnz else 0.0) + b)
        total += c * max(0.0, 1.0 - margin)
    return total


def predict_multilabel(model: LinearModel, x: SparseVector) -> NoiseLabelSet:
    """Set every class with a non-negative decision value; never return the empty set."""
    if model.kind is not ModelKind.OVR_HINGE:
        raise Malformed(f"expected an OVR hinge model, got {model.kind.value}")
    decision = model.decision_values(x)
    mask = 0
    for j, value in enumerate(decision):
        if value >= 0.0:
            mask |= 1 << j
    if mask == 0:
        mask = 1 << int(np.argmax(decision))
    return NoiseLabelSet(mask)


def _softmax(z: np.ndarray) -> np.ndarray:
    e = np.exp(z - np.max(z, axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def softmax_loss_grad(weights, bias, features, label_idx, class_weights, c):
    """Weighted cross-entropy loss with L2 term, plus its analytic gradient.

    loss = sum_i cw[y_i] * (-ln softmax(W x_i + b)_{y_i}) + ||W||^2 / (2c)
    """
    k, _ = weights.shape
    loss = float(np.sum(weights * weights)) / (2.0 * c)
    grad_w = weights / c
    grad_b = np.zeros(k, dtype=np.float64)
    for x, yi in zip(features, label_idx):
        z = (weights[:, x.indices] @ x.values if x.nnz else np.zeros(k)) + bias
        p = _softmax(z)
        cw = class_weights[yi]
        loss -= cw * float(np.log(p[yi]))
        delta = cw * p
        delta[yi] -= cw
        if x.nnz:
            grad_w[:, x.indices] += delta[:, None] * x.values[None, :]
        grad_b += delta
    return loss, grad_w, grad_b


def train_softmax_weighted(
    features,
    labels,
    weights: ClassWeights | None,
    config: TrainConfig,
    dim: int | None = None,
    class_names: tuple[str, ...] = SENTIMENT_CLASSES,
) -> LinearModel:
    """Cost-sensitive softmax regression by seeded SGD.

    Minimizes sum_i cw[y_i] * CE_i + ||W||^2 / (2c); passing uniform weights
    (or None) reproduces unweighted training bit for bit.
    """
    _check_training_inputs(features, labels)
    k = len(class_names)
    if weights is None:
        weights = ClassWeights.uniform(k)
    if len(weights.values) != k:
        raise DimensionMismatch(
            f"{len(weights.values)} class weights for {k} classes"
        )
    d = _feature_dim(features, dim)
    n = len(features)
    label_idx = np.array([int(lbl) for lbl in labels], dtype=np.intp)
    if label_idx.min() < 0 or label_idx.max() >= k:
        raise DimensionMismatch("label index outside class range")
    cw = np.asarray(weights.values, dtype=np.float64)

    sw = _ScaledWeights(k, d)
    bias = np.zeros(k, dtype=np.float64)
    rng = np.random.default_rng(config.seed)
    lr0 = config.learning_rate
    step = 0
    for _ in range(config.epochs):
        for i in rng.permutation(n):
            lr = lr0 / (1.0 + step / n)
            step += 1
            x = features[i]
            yi = label_idx[i]
            if x.nnz:
                z = sw.scale * (sw.w[:, x.indices] @ x.values) + bias
            else:
                z = bias.copy()
            delta = cw[yi] * _softmax(z)
            delta[yi] -= cw[yi]
            # L2 term contributes W/(c*n) per sample.
            sw.shrink(1.0 - lr / (config.c * n))
            if x.nnz:
                sw.w[:, x.indices] -= (lr / sw.scale) * delta[:, None] * x.values[None, :]
            bias -= lr * delta
    return LinearModel(
        kind=ModelKind.SOFTMAX_WEIGHTED,
        class_names=tuple(class_names),
        weights=sw.dense(),
        bias=bias,
        train_config=config,
    )


def predict_sentiment(model: LinearModel, x: SparseVector):
    """Return (label, per-class probabilities); argmax ties go to the lowest class index."""
    if model.kind is not ModelKind.SOFTMAX_WEIGHTED:
        raise Malformed(f"expected a softmax model, got {model.kind.value}")
    probs = _softmax(model.decision_values(x))
    probs = probs / probs.sum()
    label = SentimentLabel.from_name(model.class_names[int(np.argmax(probs))])
    return label, probs


def to_json(model: LinearModel) -> str:
    """Versioned JSON with per-class sparse weight entries; byte-deterministic."""
    per_class = []
    for row in model.weights:
        nz = np.nonzero(row)[0]
        per_class.append([[int(i), float(row[i])] for i in nz])
    cfg = None
    if model.train_config is not None:
        cfg = {
            "c": model.train_config.c,
            "epochs": model.train_config.epochs,
            "learning_rate": model.train_config.learning_rate,
            "seed": model.train_config.seed,
            "class_weights": (
                list(model.train_config.class_weights)
                if model.train_config.class_weights is not None
                else None
            ),
        }
    payload = {
        "version": LINEAR_FORMAT,
        "kind": model.kind.value,
        "class_names": list(model.class_names),
        "dim": model.dim,
        "biases": [float(b) for b in model.bias],
        "weights": per_class,
        "train_config": cfg,
    }
    return json.dumps(payload, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def from_json(text: str) -> LinearModel:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise Malformed(f"invalid JSON: {exc}") from None
    if payload.get("version") != LINEAR_FORMAT:
        raise Malformed(f"unsupported linear model version {payload.get('version')!r}")
    class_names = tuple(payload["class_names"])
    dim = int(payload["dim"])
    weights = np.zeros((len(class_names), dim), dtype=np.float64)
    for row, entries in zip(weights, payload["weights"]):
        for idx, value in entries:
            if not 0 <= int(idx) < dim:
                raise Malformed(f"weight index {idx} outside dimension {dim}")
            row[int(idx)] = float(value)
    bias = np.asarray(payload["biases"], dtype=np.float64)
    if bias.shape != (len(class_names),):
        raise DimensionMismatch("bias count does not match class count")
    cfg = payload.get("train_config")
    train_config = None
    if cfg is not None:
        train_config = TrainConfig(
            c=cfg["c"],
            epochs=cfg["epochs"],
            learning_rate=cfg["learning_rate"],
            seed=cfg["seed"],
            class_weights=tuple(cfg["class_weights"]) if cfg.get("class_weights") else None,
        )
    return LinearModel(
        kind=ModelKind(payload["kind"]),
        class_names=class_names,
        weights=weights,
        bias=bias,
        train_config=train_config,
    )
