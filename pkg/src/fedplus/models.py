"""Differentiable workloads: multinomial logistic regression and a quadratic.

Logistic parameters are packed into one flat vector: the ``(classes, features)``
weight matrix in row-major order followed by the ``classes`` biases.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError, DimensionError
from .params import as_vector, check_same_length


@dataclass(frozen=True)
class LogisticShape:
    features: int
    classes: int

    @property
    def size(self):
        return self.classes * self.features + self.classes

    def unpack(self, params):
        params = as_vector(params, "params")
        if params.shape[0] != self.size:
            raise DimensionError(f"expected {self.size} parameters, got {params.shape[0]}")
        split = self.classes * self.features
        return params[:split].reshape(self.classes, self.features), params[split:]

    def pack(self, W, b):
        return np.concatenate([np.asarray(W, dtype=np.float64).ravel(), np.asarray(b, dtype=np.float64)])


@dataclass(frozen=True)
class Batch:
    """Feature rows ``(n, features)`` and integer class labels ``(n,)``."""

    features: np.ndarray
    labels: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
            raise DataError(f"features {X.shape} and labels {y.shape} do not line up")
        if X.shape[0] == 0:
            raise DataError("empty batch")
        if not np.issubdtype(y.dtype, np.integer):
            raise DataError("labels must be integers")
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y.astype(np.int64, copy=False))

    def __len__(self):
        return self.labels.shape[0]

    def take(self, idx):
        return Batch(self.features[idx], self.labels[idx])


def _logits(shape, params, batch):
    W, b = shape.unpack(params)
    if batch.features.shape[1] != shape.features:
        raise DimensionError(f"batch has {batch.features.shape[1]} features, model expects {shape.features}")
    if batch.labels.min() < 0 or batch.labels.max() >= shape.classes:
        raise DataError(f"labels must lie in [0, {shape.classes})")
    return batch.features @ W.T + b


def _log_softmax(z):
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def loss(shape, params, batch):
    """Mean cross-entropy of ``softmax(W x + b)`` against the labels."""
    logp = _log_softmax(_logits(shape, params, batch))
    return float(-logp[np.arange(len(batch)), batch.labels].mean())


def grad(shape, params, batch):
    """Exact gradient of :func:`loss`, packed like ``params``."""
    z = _logits(shape, params, batch)
    p = np.exp(_log_softmax(z))
    p[np.arange(len(batch)), batch.labels] -= 1.0
    p /= len(batch)
    return np.concatenate([(p.T @ batch.features).ravel(), p.sum(axis=0)])


def predict(shape, params, features):
    W, b = shape.unpack(params)
    # np.argmax returns the first maximum, i.e. ties go to the lowest class
    return np.argmax(np.asarray(features, dtype=np.float64) @ W.T + b, axis=1)


def accuracy(shape, params, batch):
    """Fraction of samples whose arg-max class equals the label."""
    _logits(shape, params, batch)
    return float(np.mean(predict(shape, params, batch.features) == batch.labels))


def quadratic_loss(center, params):
    """``0.5 * ||params - center||^2``."""
    c = as_vector(center, "center")
    x = as_vector(params, "params")
    check_same_length(c, x)
    d = x - c
    return 0.5 * float(d @ d)


def quadratic_grad(center, params):
    c = as_vector(center, "center")
    x = as_vector(params, "params")
    check_same_length(c, x)
    return x - c
