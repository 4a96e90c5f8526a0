"""Flat parameter-vector algebra and the proximal distance ``B``.

Parameter vectors are plain 1-D ``float64`` numpy arrays. The distance is the
diagonally scaled half squared norm ``0.5 * sum_d q_d (x_d - c_d)^2``; the
unscaled ``squared-l2`` kind is the special case ``q = 1``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DimensionError

DISTANCE_KINDS = ("squared-l2", "scaled-q")


def as_vector(x, name="x"):
    """Return ``x`` as a 1-D float64 array (no copy if already one)."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise DimensionError(f"{name} must be 1-D, got shape {arr.shape}")
    return arr


def check_same_length(*vectors):
    sizes = {v.shape[0] for v in vectors}
    if len(sizes) > 1:
        raise DimensionError(f"length mismatch: {sorted(sizes)}")


def axpy(a, x, y):
    """Return ``a * x + y``."""
    x = as_vector(x, "x")
    y = as_vector(y, "y")
    check_same_length(x, y)
    return a * x + y


@dataclass(frozen=True)
class DistanceSpec:
    """Which proximal distance to use.

    ``q_diag`` is the diagonal of the positive-definite scaling matrix and is
    required (and only meaningful) for ``kind="scaled-q"``.
    """

    kind: str = "squared-l2"
    q_diag: tuple | None = None

    def validate(self, dim=None):
        if self.kind not in DISTANCE_KINDS:
            raise ConfigError(f"unknown distance kind {self.kind!r}; expected one of {DISTANCE_KINDS}")
        if self.kind == "scaled-q":
            if self.q_diag is None:
                raise ConfigError("scaled-q distance requires q_diag")
            q = np.asarray(self.q_diag, dtype=np.float64)
            if q.ndim != 1 or not np.all(np.isfinite(q)) or np.any(q <= 0):
                raise ConfigError("q_diag must be a 1-D array of finite positive reals")
            if dim is not None and q.shape[0] != dim:
                raise DimensionError(f"q_diag has length {q.shape[0]}, expected {dim}")
        return self

    def weights(self, dim):
        """Diagonal of Q as an array of length ``dim``."""
        self.validate(dim)
        if self.kind == "squared-l2":
            return np.ones(dim)
        return np.asarray(self.q_diag, dtype=np.float64)


def distance(spec, x, c):
    """``0.5 * ||x - c||_Q^2``."""
    x = as_vector(x, "x")
    c = as_vector(c, "c")
    check_same_length(x, c)
    diff = x - c
    return 0.5 * float(np.sum(spec.weights(x.shape[0]) * diff * diff))


def distance_grad(spec, x, c):
    """Gradient of :func:`distance` with respect to ``x``: ``Q (x - c)``."""
    x = as_vector(x, "x")
    c = as_vector(c, "c")
    check_same_length(x, c)
    return spec.weights(x.shape[0]) * (x - c)
