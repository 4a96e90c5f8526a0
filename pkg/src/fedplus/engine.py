"""Round-based federation loop with persistent or reset party models.

One engine covers FedAvg, FedProx, RFA and coordinate-wise median (parties
restart every round from the central model) and their "+" variants (parties
keep their own model and are only pulled toward the centre by a proximal
penalty). :data:`PRESETS` holds the seven named parameterizations.

Random streams are keyed by purpose so that results do not depend on the
order in which parties are processed::

    init      default_rng([seed, 0])
    sampling  default_rng([seed, 1, k])       round k
    local     default_rng([seed, 2, n, k])    party n, round k
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import partial

import numpy as np

from . import models
from .aggregators import CentralitySpec, aggregate
from .errors import ConfigError, NumericalError
from .local import START_MODES, AlphaSchedule, LocalSolveSpec, advance_alpha, local_solve
from .params import DistanceSpec

SAMPLING_MODES = ("bernoulli", "fixed-count")
EVAL_MODELS = ("auto", "personal", "central")

_INIT, _SAMPLE, _LOCAL = 0, 1, 2


def init_rng(seed):
    return np.random.default_rng([seed, _INIT])


def sampling_rng(seed, k):
    return np.random.default_rng([seed, _SAMPLE, k])


def party_rng(seed, n, k):
    return np.random.default_rng([seed, _LOCAL, n, k])


# -- tasks -----------------------------------------------------------------


class LogisticTask:
    """A party holding a train/test split for multinomial logistic regression."""

    init_scale = 0.05

    def __init__(self, shape, train, test):
        self.shape = shape
        self.train = train
        self.test = test
        self.grad_fn = partial(models.grad, shape)

    @classmethod
    def from_synthetic(cls, task):
        d_out, d_in = task.truth_W.shape
        return cls(models.LogisticShape(d_in, d_out), task.train, task.test)

    @property
    def dim(self):
        return self.shape.size

    @property
    def data(self):
        return self.train

    def initial_params(self, rng):
        return rng.uniform(-self.init_scale, self.init_scale, size=self.dim)

    def evaluate(self, params):
        return models.loss(self.shape, params, self.train), models.accuracy(self.shape, params, self.test)


class QuadraticTask:
    """Diagnostic party with loss ``0.5 * ||x - center||^2`` and no data."""

    data = None

    def __init__(self, center):
        self.center = np.atleast_1d(np.asarray(center, dtype=np.float64))

    @property
    def dim(self):
        return self.center.shape[0]

    def grad_fn(self, params, _batch=None):
        return models.quadratic_grad(self.center, params)

    def initial_params(self, rng):
        return np.zeros(self.dim)

    def evaluate(self, params):
        return models.quadratic_loss(self.center, params), float("nan")


def as_tasks(tasks):
    """Wrap synthetic tasks / bare centres into engine task objects."""
    out = []
    for t in tasks:
        if hasattr(t, "grad_fn"):
            out.append(t)
        elif hasattr(t, "truth_W"):
            out.append(LogisticTask.from_synthetic(t))
        else:
            out.append(QuadraticTask(t))
    return out


# -- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class FederationConfig:
    """Everything that selects one member of the algorithm family.

    ``local.alpha`` is ignored; the per-round penalty comes from ``alpha``.
    """

    name: str = "custom"
    rounds: int = 200
    local: LocalSolveSpec = field(default_factory=LocalSolveSpec)
    alpha: AlphaSchedule = field(default_factory=AlphaSchedule)
    centrality: CentralitySpec = field(default_factory=CentralitySpec)
    start_mode: str = "persist"
    sampling: str = "fixed-count"
    participation: float = 1.0
    parties_per_round: int = 10
    aggregate_over: str = "active"
    eval_every: int = 1
    eval_model: str = "auto"
    seed: int = 0

    def validate(self, parties=None):
        if self.rounds < 0:
            raise ConfigError("rounds must be non-negative")
        self.local.validate()
        self.alpha.validate()
        self.centrality.validate()
        if self.start_mode not in START_MODES:
            raise ConfigError(f"unknown start_mode {self.start_mode!r}; expected one of {START_MODES}")
        if self.sampling not in SAMPLING_MODES:
            raise ConfigError(f"unknown sampling {self.sampling!r}; expected one of {SAMPLING_MODES}")
        if self.sampling == "bernoulli" and not 0 < self.participation <= 1:
            raise ConfigError("participation must lie in (0, 1]")
        if self.sampling == "fixed-count":
            if self.parties_per_round < 1:
                raise ConfigError("parties_per_round must be at least 1")
            if parties is not None and self.parties_per_round > parties:
                raise ConfigError(f"parties_per_round={self.parties_per_round} exceeds {parties} parties")
        if self.aggregate_over not in ("active", "all"):
            raise ConfigError("aggregate_over must be 'active' or 'all'")
        if self.eval_every < 1:
            raise ConfigError("eval_every must be at least 1")
        if self.eval_model not in EVAL_MODELS:
            raise ConfigError(f"eval_model must be one of {EVAL_MODELS}")
        if self.centrality.weights is not None and parties is not None and len(self.centrality.weights) != parties:
            raise ConfigError(f"{len(self.centrality.weights)} centrality weights for {parties} parties")
        return self

    @property
    def personal_eval(self):
        if self.eval_model == "auto":
            return self.start_mode == "persist"
        return self.eval_model == "personal"

    def alpha_at(self, k):
        return advance_alpha(self.alpha, k)


PRESETS = {
    "fedavg": dict(start_mode="reset", centrality="mean", alpha="zero"),
    "fedprox": dict(start_mode="reset", centrality="mean", alpha="prox"),
    "rfa": dict(start_mode="reset", centrality="geometric-median", alpha="zero"),
    "cmedian": dict(start_mode="reset", centrality="coordinate-median", alpha="zero"),
    "fedavg+": dict(start_mode="persist", centrality="mean", alpha="plus"),
    "rfa+": dict(start_mode="persist", centrality="geometric-median", alpha="plus"),
    "cmedian+": dict(start_mode="persist", centrality="coordinate-median", alpha="plus"),
}

#: baseline preset each "+" variant is compared against
PLUS_BASELINE = {"fedavg+": "fedavg", "rfa+": "rfa", "cmedian+": "cmedian"}


def preset_config(name, base=None, *, alpha=0.001, prox_mu=1.0, alpha_schedule="constant", decay=0.99):
    """Config for a named preset, layered over ``base`` (defaults otherwise).

    ``alpha`` is the penalty of the "+" presets, ``prox_mu`` that of FedProx.
    The distance is always the unscaled squared L2 norm.
    """
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")
    p = PRESETS[name]
    base = base or FederationConfig()
    if p["alpha"] == "zero":
        schedule = AlphaSchedule("constant", 0.0, 1.0)
    elif p["alpha"] == "prox":
        schedule = AlphaSchedule("constant", prox_mu, 1.0)
    else:
        schedule = AlphaSchedule(alpha_schedule, alpha, decay)
    return replace(
        base,
        name=name,
        start_mode=p["start_mode"],
        alpha=schedule,
        centrality=replace(base.centrality, kind=p["centrality"]),
        local=replace(base.local, distance=DistanceSpec("squared-l2")),
    )


def describe_presets():
    lines = []
    for name, p in PRESETS.items():
        alpha = {"zero": "0", "prox": "mu (constant, >0)", "plus": "alpha (>0, constant or decaying)"}[p["alpha"]]
        lines.append(
            f"{name:<9} start_mode={p['start_mode']:<8} centrality={p['centrality']:<18} "
            f"distance=squared-l2 alpha={alpha}"
        )
    return "\n".join(lines)


# -- records ---------------------------------------------------------------


@dataclass
class RoundRecord:
    """What happened in federated round ``k``.

    ``train_loss``/``test_acc`` hold one entry per party and are ``None`` on
    rounds skipped by the evaluation cadence. ``change`` summarizes the
    absolute parameter change each active party sees across aggregation:
    from its uploaded model to the model it resumes from (``x_hat`` in reset
    mode, its own model in persist mode). ``center_gap`` is the same summary
    of ``|x_n - x_hat|`` for the active parties after aggregation.
    """

    round: int
    active: tuple
    alpha: float
    x_hat_before: np.ndarray
    x_hat_after: np.ndarray
    change: dict
    center_gap: dict
    train_loss: np.ndarray | None = None
    test_acc: np.ndarray | None = None
    starts: dict | None = None
    uploads: dict | None = None

    @property
    def evaluated(self):
        return self.train_loss is not None


def abs_change_stats(before, after):
    """Mean, std and max of ``|after - before|`` pooled over parties and coordinates."""
    if len(before) != len(after):
        raise ConfigError(f"{len(before)} 'before' models but {len(after)} 'after' models")
    if len(before) == 0:
        return {"mean": 0.0, "std": 0.0, "max": 0.0}
    d = np.abs(np.stack([np.asarray(a, dtype=np.float64) for a in after]) - np.stack([np.asarray(b, dtype=np.float64) for b in before]))
    return {"mean": float(d.mean()), "std": float(d.std()), "max": float(d.max())}


def _arrays_equal(a, b):
    if a is None or b is None:
        return a is b
    return np.array_equal(a, b, equal_nan=True)


def records_identical(a, b):
    """Exact equality of two record streams (floats compared bitwise-equal)."""
    if len(a) != len(b):
        return False
    for r, s in zip(a, b):
        if (r.round, r.active, r.alpha, r.change, r.center_gap) != (s.round, s.active, s.alpha, s.change, s.center_gap):
            return False
        for f in ("x_hat_before", "x_hat_after", "train_loss", "test_acc"):
            if not _arrays_equal(getattr(r, f), getattr(s, f)):
                return False
    return True


# -- the loop --------------------------------------------------------------


def sample_parties(config, n_parties, rng):
    """Active set for one round, as a sorted tuple of party indices."""
    if config.sampling == "fixed-count":
        return tuple(sorted(int(i) for i in rng.choice(n_parties, size=config.parties_per_round, replace=False)))
    if config.participation >= 1:
        return tuple(range(n_parties))
    while True:
        mask = rng.random(n_parties) < config.participation
        if mask.any():
            return tuple(int(i) for i in np.flatnonzero(mask))


def evaluate_parties(tasks, models_):
    losses = np.empty(len(tasks))
    accs = np.empty(len(tasks))
    for n, (task, x) in enumerate(zip(tasks, models_)):
        losses[n], accs[n] = task.evaluate(x)
    return losses, accs


def _weights_for(centrality, idx):
    if centrality.weights is None:
        return centrality
    w = tuple(centrality.weights[i] for i in idx)
    return replace(centrality, weights=w)


def initial_state(config, tasks):
    x0 = tasks[0].initial_params(init_rng(config.seed))
    party_models = [x0.copy() for _ in tasks]
    x_hat = aggregate(config.centrality, party_models)
    return party_models, x_hat


def run_federation(config, tasks, *, record_states=False):
    """Run ``config.rounds`` federated rounds over ``tasks``; return the records.

    Every party starts from one shared random draw; the initial centre is the
    aggregate of those models. In round ``k`` the sampled parties run
    Local-Solve against the previous centre, starting from their own model
    (persist) or from the centre (reset); the new centre aggregates the
    uploads of the active parties (or of all parties when
    ``aggregate_over="all"``). Inactive parties are left untouched.
    """
    tasks = as_tasks(tasks)
    N = len(tasks)
    if N == 0:
        raise ConfigError("need at least one party")
    config.validate(N)
    dims = {t.dim for t in tasks}
    if len(dims) != 1:
        raise ConfigError(f"parties disagree on model dimension: {sorted(dims)}")

    party_models, x_hat = initial_state(config, tasks)
    records = []
    for k in range(1, config.rounds + 1):
        active = sample_parties(config, N, sampling_rng(config.seed, k))
        alpha = config.alpha_at(k)
        spec = replace(config.local, alpha=alpha)
        starts, uploads = {}, {}
        for n in active:
            start = party_models[n] if config.start_mode == "persist" else x_hat
            starts[n] = start
            try:
                x_n = local_solve(spec, tasks[n].grad_fn, start, x_hat, tasks[n].data, party_rng(config.seed, n, k))
            except NumericalError as exc:
                exc.party, exc.round = n, k
                raise
            uploads[n] = x_n
            party_models[n] = x_n

        members = active if config.aggregate_over == "active" else tuple(range(N))
        new_hat = aggregate(_weights_for(config.centrality, members), [party_models[n] for n in members])
        if not np.all(np.isfinite(new_hat)):
            raise NumericalError("non-finite central model", round=k)

        before = [uploads[n] for n in active]
        after = [new_hat] * len(active) if config.start_mode == "reset" else before
        rec = RoundRecord(
            round=k,
            active=active,
            alpha=alpha,
            x_hat_before=x_hat,
            x_hat_after=new_hat,
            change=abs_change_stats(before, after),
            center_gap=abs_change_stats(before, [new_hat] * len(active)),
        )
        x_hat = new_hat
        if k % config.eval_every == 0 or k == config.rounds:
            evaluated = party_models if config.personal_eval else [x_hat] * N
            rec.train_loss, rec.test_acc = evaluate_parties(tasks, evaluated)
        if record_states:
            rec.starts, rec.uploads = starts, uploads
        records.append(rec)
    return records
