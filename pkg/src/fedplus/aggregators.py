"""Centrality functions used by the aggregator to fuse party models.

Three kinds are supported: the weighted mean, the geometric median
(smoothed Weiszfeld iterations) and the coordinate-wise median.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AggregationError, ConfigError, DimensionError

CENTRALITY_KINDS = ("mean", "geometric-median", "coordinate-median")


@dataclass(frozen=True)
class CentralitySpec:
    kind: str = "mean"
    weights: tuple | None = None
    weiszfeld_iters: int = 1000
    weiszfeld_tol: float = 1e-10
    weiszfeld_smoothing: float = 1e-8

    def validate(self):
        if self.kind not in CENTRALITY_KINDS:
            raise ConfigError(f"unknown centrality {self.kind!r}; expected one of {CENTRALITY_KINDS}")
        if self.weiszfeld_iters < 1:
            raise ConfigError("weiszfeld_iters must be a positive integer")
        if not self.weiszfeld_tol > 0 or not self.weiszfeld_smoothing > 0:
            raise ConfigError("weiszfeld_tol and weiszfeld_smoothing must be positive")
        if self.weights is not None:
            _check_weights(self.weights)
        return self


def _check_weights(weights, n=None):
    w = np.asarray(weights, dtype=np.float64)
    if w.ndim != 1 or np.any(~np.isfinite(w)) or np.any(w <= 0):
        raise ConfigError("weights must be finite and strictly positive")
    if n is not None and w.shape[0] != n:
        raise DimensionError(f"{w.shape[0]} weights for {n} models")
    return w


def stack_models(models):
    """Stack a list of parameter vectors into an ``(N, D)`` array."""
    if len(models) == 0:
        raise AggregationError("cannot aggregate an empty list of models")
    arrays = [np.asarray(m, dtype=np.float64) for m in models]
    dims = {a.shape for a in arrays}
    if len(dims) != 1 or arrays[0].ndim != 1:
        raise DimensionError(f"models must be 1-D vectors of equal length, got shapes {sorted(dims)}")
    return np.stack(arrays)


def _combine(X, p):
    # Convex combination taken relative to the first model, so that identical
    # models are reproduced exactly and shifts commute with the combination.
    ref = X[0]
    return ref + p @ (X - ref)


def weighted_mean(X, weights=None):
    n = X.shape[0]
    w = np.ones(n) if weights is None else _check_weights(weights, n)
    return _combine(X, w / w.sum())


def coordinate_median(X, weights=None):
    """Per-coordinate (weighted) median, lower-middle element on ties.

    With uniform weights this is ``sort(X)[(N - 1) // 2]`` in every column, so
    the output is always one of the observed values.
    """
    n = X.shape[0]
    if weights is None:
        return np.sort(X, axis=0)[(n - 1) // 2]
    w = _check_weights(weights, n)
    order = np.argsort(X, axis=0, kind="stable")
    cum = np.cumsum(w[order], axis=0)
    half = 0.5 * w.sum()
    # first sorted position whose cumulative weight reaches half the total
    pos = np.argmax(cum >= half * (1 - 1e-12), axis=0)
    cols = np.arange(X.shape[1])
    return X[order[pos, cols], cols]


def geometric_median_objective(z, models, weights=None):
    """``sum_n w_n ||z - x_n||`` (uniform unit weights by default)."""
    X = stack_models(models) if not isinstance(models, np.ndarray) or models.ndim != 2 else models
    z = np.asarray(z, dtype=np.float64)
    if z.shape != X.shape[1:]:
        raise DimensionError(f"z has shape {z.shape}, models have dimension {X.shape[1]}")
    dists = np.linalg.norm(X - z, axis=1)
    if weights is None:
        return float(dists.sum())
    return float(_check_weights(weights, X.shape[0]) @ dists)


def weiszfeld(X, weights=None, iters=1000, tol=1e-10, smoothing=1e-8, trace=None):
    """Smoothed Weiszfeld iteration for the weighted geometric median.

    Starts at the weighted mean. Each iteration computes the Weiszfeld point
    ``T(z) = sum_n b_n x_n / sum_n b_n`` with ``b_n = w_n / max(||z - x_n||, smoothing)``
    and then tries doubling the step ``T(z) - z`` while that lowers the
    objective; plain Weiszfeld crawls when the median sits close to one of the
    points. Stops after ``iters`` iterations, when successive iterates are
    closer than ``tol``, or when even the plain step would raise the objective
    (possible only inside the smoothing radius). If ``trace`` is a list, the
    objective of every accepted iterate is appended to it.
    """
    w = np.ones(X.shape[0]) if weights is None else _check_weights(weights, X.shape[0])
    w = w / w.sum()

    def objective(z):
        return float(w @ np.linalg.norm(X - z, axis=1))

    z = _combine(X, w)
    obj = objective(z)
    if trace is not None:
        trace.append(obj)
    for _ in range(iters):
        beta = w / np.maximum(np.linalg.norm(X - z, axis=1), smoothing)
        step = _combine(X, beta / beta.sum()) - z
        z_new = z + step
        obj_new = objective(z_new)
        if obj_new > obj:
            break
        scale = 2.0
        # demand a decrease above rounding noise, or doubling can run off
        # along a flat valley (e.g. the segment between two points)
        slack = 1e-13 * max(obj, 1e-300)
        while True:
            cand = z + scale * step
            obj_cand = objective(cand)
            if obj_cand >= obj_new - slack:
                break
            z_new, obj_new = cand, obj_cand
            scale *= 2.0
        moved = float(np.linalg.norm(z_new - z))
        z, obj = z_new, obj_new
        if trace is not None:
            trace.append(obj)
        if moved < tol:
            break
    snapped = _vertex_minimizer(X, w, z)
    if snapped is not None and objective(snapped) <= obj:
        z = snapped
        if trace is not None:
            trace.append(objective(z))
    return z


def _vertex_minimizer(X, w, z):
    """The input point nearest ``z`` if it satisfies the optimality condition.

    A point ``x_j`` minimizes the weighted distance sum iff the weighted sum of
    unit vectors pointing from the other points to ``x_j`` has norm at most the
    weight sitting on ``x_j``. Only clear-cut strict inequality is accepted: on the
    boundary the minimizer may be a whole segment and snapping to one end of
    it would make the result depend on point order.
    """
    j = int(np.argmin(np.linalg.norm(X - z, axis=1)))
    diff = X[j] - X
    dist = np.linalg.norm(diff, axis=1)
    away = dist > 0
    if not away.any():
        return X[j].copy()
    pull = (w[away] / dist[away]) @ diff[away]
    if np.linalg.norm(pull) < w[~away].sum() * (1 - 1e-9):
        return X[j].copy()
    return None


def aggregate(spec, models):
    """Central point of ``models`` according to ``spec``."""
    spec.validate()
    X = stack_models(models)
    if spec.kind == "mean":
        return weighted_mean(X, spec.weights)
    if spec.kind == "coordinate-median":
        return coordinate_median(X, spec.weights)
    return weiszfeld(
        X,
        spec.weights,
        iters=spec.weiszfeld_iters,
        tol=spec.weiszfeld_tol,
        smoothing=spec.weiszfeld_smoothing,
    )
