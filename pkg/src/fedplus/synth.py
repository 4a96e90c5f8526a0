"""Heterogeneous synthetic classification tasks.

Each party ``n`` draws its own ground-truth softmax model and feature
distribution::

    u_n ~ N(0, zeta)        W_n[i, j] ~ N(u_n, 1)    b_n[i] ~ N(u_n, 1)
    B_n ~ N(0, beta)        v_n[j]    ~ N(B_n, 1)
    x   ~ N(v_n, diag(j ** -1.2))     y = argmax(W_n x + b_n)

``zeta`` and ``beta`` are variances. Sample counts per party follow a
truncated discrete power law, and each party's samples are shuffled and split
into train and test parts.

Random streams: ``SeedSequence(seed)`` is spawned into ``N + 1`` children;
child ``n`` drives party ``n`` and the last child drives the sample counts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .models import Batch


@dataclass(frozen=True)
class PowerLaw:
    """Discrete power law ``P(k) ~ k ** -exponent`` on ``[min_count, max_count]``."""

    exponent: float = 1.5
    min_count: int = 64
    max_count: int = 1024

    def validate(self):
        if not (1 <= self.min_count <= self.max_count):
            raise ConfigError("power law needs 1 <= min_count <= max_count")
        if not np.isfinite(self.exponent) or self.exponent < 0:
            raise ConfigError("power-law exponent must be a finite non-negative real")
        return self

    def support(self):
        return np.arange(self.min_count, self.max_count + 1)

    def pmf(self):
        k = self.support().astype(np.float64)
        p = k ** -self.exponent
        return p / p.sum()

    def mean(self):
        return float(self.support() @ self.pmf())


def sample_counts(law, n, seed):
    """``n`` i.i.d. draws from ``law``; ``seed`` is an int or a SeedSequence."""
    law.validate()
    rng = np.random.default_rng(seed)
    if law.min_count == law.max_count:
        return [law.min_count] * n
    return [int(k) for k in rng.choice(law.support(), size=n, p=law.pmf())]


def default_sigma_diag(d_in=60):
    return np.arange(1, d_in + 1, dtype=np.float64) ** -1.2


@dataclass(frozen=True)
class SynthSpec:
    zeta: float = 1000.0
    beta: float = 10.0
    parties: int = 30
    d_in: int = 60
    d_out: int = 10
    counts: PowerLaw = field(default_factory=PowerLaw)
    train_fraction: float = 0.8
    seed: int = 0

    def validate(self):
        if self.zeta < 0 or self.beta < 0:
            raise ConfigError("zeta and beta must be non-negative")
        if self.parties < 1 or self.d_in < 1 or self.d_out < 2:
            raise ConfigError("need parties >= 1, d_in >= 1 and d_out >= 2")
        self.counts.validate()
        if self.counts.min_count < self.d_out:
            raise ConfigError("min_count must be at least the number of classes")
        if not 0 < self.train_fraction < 1:
            raise ConfigError("train_fraction must lie in (0, 1)")
        n_train = _train_size(self.counts.min_count, self.train_fraction)
        if n_train < 1 or n_train >= self.counts.min_count:
            raise ConfigError("min_count too small for a non-empty train/test split")
        return self

    def sigma_diag(self):
        return default_sigma_diag(self.d_in)


@dataclass(frozen=True)
class SyntheticTask:
    party: int
    truth_W: np.ndarray
    truth_b: np.ndarray
    model_shift: float  # u_n
    data_shift: float  # B_n
    feature_mean: np.ndarray  # v_n
    train: Batch
    test: Batch


def _train_size(count, fraction):
    return int(np.floor(fraction * count + 0.5))


def truth_labels(W, b, features):
    """Labels of ``features`` under a ground-truth softmax model (arg-max)."""
    return np.argmax(features @ W.T + b, axis=1)


def _make_party(n, count, spec, rng, sigma_sd):
    u = rng.normal(0.0, np.sqrt(spec.zeta))
    B = rng.normal(0.0, np.sqrt(spec.beta))
    W = rng.normal(u, 1.0, size=(spec.d_out, spec.d_in))
    b = rng.normal(u, 1.0, size=spec.d_out)
    v = rng.normal(B, 1.0, size=spec.d_in)
    X = v + sigma_sd * rng.standard_normal((count, spec.d_in))
    y = truth_labels(W, b, X)
    perm = rng.permutation(count)
    k = _train_size(count, spec.train_fraction)
    tr, te = perm[:k], perm[k:]
    return SyntheticTask(
        party=n,
        truth_W=W,
        truth_b=b,
        model_shift=float(u),
        data_shift=float(B),
        feature_mean=v,
        train=Batch(X[tr], y[tr]),
        test=Batch(X[te], y[te]),
    )


def generate(spec):
    """Generate one :class:`SyntheticTask` per party, deterministically from ``spec.seed``."""
    spec.validate()
    children = np.random.SeedSequence(spec.seed).spawn(spec.parties + 1)
    counts = sample_counts(spec.counts, spec.parties, children[-1])
    sigma_sd = np.sqrt(spec.sigma_diag())
    return [
        _make_party(n, counts[n], spec, np.random.default_rng(children[n]), sigma_sd)
        for n in range(spec.parties)
    ]


def export_tasks(tasks, path):
    """Write tasks as CSV: ``party, split, label, x0 .. x{d-1}``.

    Floats are written with ``repr`` so the file round-trips exactly.
    """
    d = tasks[0].train.features.shape[1]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["party", "split", "label"] + [f"x{j}" for j in range(d)])
        for task in tasks:
            for split, batch in (("train", task.train), ("test", task.test)):
                for x, y in zip(batch.features, batch.labels):
                    writer.writerow([task.party, split, int(y)] + [repr(float(v)) for v in x])


def read_exported(path):
    """Inverse of :func:`export_tasks`: ``{(party, split): Batch}``."""
    rows = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        next(reader)
        for row in reader:
            key = (int(row[0]), row[1])
            rows.setdefault(key, ([], []))
            rows[key][0].append([float(v) for v in row[3:]])
            rows[key][1].append(int(row[2]))
    return {k: Batch(np.array(X), np.array(y)) for k, (X, y) in rows.items()}
