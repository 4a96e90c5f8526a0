"""Independent reference computations used only by the tests.

Nothing here imports the code under test.
"""

import math

import numpy as np


def central_fd(f, x, h=1e-5):
    x = np.asarray(x, dtype=np.float64)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def rel_err(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def geomedian_grid(points, weights=None, lo=None, hi=None, n=400, refinements=2, patch=8):
    """Brute-force 2-D geometric median: evaluate on an n x n grid, then
    re-grid an n x n patch of +-``patch`` cells around the best point.

    The input points are candidates too: when the median sits on one of them
    the objective is cone-shaped there and a grid can only approach it.
    """
    P = np.asarray(points, dtype=np.float64)
    w = np.ones(len(P)) if weights is None else np.asarray(weights, dtype=np.float64)
    lo = P.min(axis=0) - 1 if lo is None else np.asarray(lo, dtype=np.float64)
    hi = P.max(axis=0) + 1 if hi is None else np.asarray(hi, dtype=np.float64)
    best = None
    for _ in range(refinements + 1):
        xs = np.linspace(lo[0], hi[0], n)
        ys = np.linspace(lo[1], hi[1], n)
        gx, gy = np.meshgrid(xs, ys, indexing="ij")
        obj = np.zeros_like(gx)
        for (px, py), wi in zip(P, w):
            obj += wi * np.hypot(gx - px, gy - py)
        i, j = np.unravel_index(np.argmin(obj), obj.shape)
        best = np.array([xs[i], ys[j]])
        cell = (hi - lo) / (n - 1)
        lo, hi = best - patch * cell, best + patch * cell

    def total(z):
        return float(sum(wi * np.hypot(*(z - p)) for p, wi in zip(P, w)))

    vertex = min(P, key=total)
    return vertex.copy() if total(vertex) <= total(best) else best


def softmax_ce_loop(W, b, X, y):
    """Plain-python mean cross entropy."""
    total = 0.0
    for xi, yi in zip(X, y):
        logits = [sum(W[c][j] * xi[j] for j in range(len(xi))) + b[c] for c in range(len(b))]
        m = max(logits)
        lse = m + math.log(sum(math.exp(z - m) for z in logits))
        total += lse - logits[yi]
    return total / len(y)


def predict_loop(W, b, X):
    out = []
    for xi in X:
        logits = [sum(W[c][j] * xi[j] for j in range(len(xi))) + b[c] for c in range(len(b))]
        best = 0
        for c in range(1, len(logits)):
            if logits[c] > logits[best]:
                best = c
        out.append(best)
    return out


def truncated_power_law_mean(s, lo, hi):
    num = sum(k ** (1 - s) for k in range(lo, hi + 1))
    den = sum(k ** (-s) for k in range(lo, hi + 1))
    return num / den
