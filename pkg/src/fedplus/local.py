"""Party-side Local-Solve: a fixed number of penalized gradient steps."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NumericalError
from .params import DistanceSpec, as_vector, check_same_length, distance_grad

START_MODES = ("persist", "reset")
ALPHA_SCHEDULES = ("constant", "geometric-decay")


@dataclass(frozen=True)
class AlphaSchedule:
    kind: str = "constant"
    alpha0: float = 0.001
    decay: float = 0.99

    def validate(self):
        if self.kind not in ALPHA_SCHEDULES:
            raise ConfigError(f"unknown alpha schedule {self.kind!r}; expected one of {ALPHA_SCHEDULES}")
        if not self.alpha0 >= 0:
            raise ConfigError("alpha0 must be non-negative")
        if not 0 < self.decay <= 1:
            raise ConfigError("decay must lie in (0, 1]")
        return self


def advance_alpha(schedule, k):
    """Penalty strength for federated round ``k`` (1-based)."""
    if k < 1:
        raise ConfigError("rounds are numbered from 1")
    if schedule.kind == "constant":
        return schedule.alpha0
    return schedule.alpha0 * schedule.decay ** (k - 1)


@dataclass(frozen=True)
class LocalSolveSpec:
    """Settings of one Local-Solve call.

    ``batch_size=None`` means full-batch gradients.
    """

    steps: int = 20
    gamma: float = 0.01
    alpha: float = 0.0
    batch_size: int | None = 32
    distance: DistanceSpec = field(default_factory=DistanceSpec)

    def validate(self):
        if self.steps < 0:
            raise ConfigError("steps must be non-negative")
        if not self.gamma > 0:
            raise ConfigError("gamma must be positive")
        if not self.alpha >= 0:
            raise ConfigError("alpha must be non-negative")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError("batch_size must be positive (or None for full batch)")
        self.distance.validate()
        return self


def convex_combination_step(x, x_hat, gamma, alpha, grad_f):
    """``(1 - gamma*alpha) x + gamma*alpha x_hat - gamma grad_f``."""
    a = gamma * alpha
    return (1.0 - a) * x + a * x_hat - gamma * grad_f


def penalized_step(x, x_hat, gamma, alpha, grad_f, distance=None):
    """``x - gamma (grad_f + alpha * grad_B(x, x_hat))``."""
    if alpha == 0:
        return x - gamma * grad_f
    return x - gamma * (grad_f + alpha * distance_grad(distance or DistanceSpec(), x, x_hat))


def local_solve(spec, grad_fn, x_start, x_hat, data=None, rng=None):
    """Run ``spec.steps`` penalized gradient steps from ``x_start``.

    ``grad_fn(params, batch)`` returns the gradient of the party loss on
    ``batch``. When ``spec.batch_size`` is set and ``data`` is given, every step
    draws ``batch_size`` indices uniformly with replacement from ``rng``;
    otherwise ``data`` is passed whole. ``x_hat`` is held fixed.
    """
    x = as_vector(x_start, "x_start").copy()
    x_hat = as_vector(x_hat, "x_hat")
    check_same_length(x, x_hat)
    minibatch = spec.batch_size is not None and data is not None
    if minibatch and rng is None:
        raise ConfigError("minibatch local solve needs an rng")
    for t in range(spec.steps):
        batch = data.take(rng.integers(0, len(data), size=spec.batch_size)) if minibatch else data
        g = grad_fn(x, batch)
        if not np.all(np.isfinite(g)):
            raise NumericalError("non-finite gradient", step=t + 1)
        x = penalized_step(x, x_hat, spec.gamma, spec.alpha, g, spec.distance)
        if not np.all(np.isfinite(x)):
            raise NumericalError("non-finite parameters", step=t + 1)
    return x
