"""Classic single-global-model loops for FedAvg, FedProx, RFA and coordinate median.

These are written the way those algorithms are usually described: the server
keeps one global model, broadcasts it, every sampled client trains a copy
(with a proximal term for FedProx) and the server replaces the global model
with the aggregate. They share the random-stream layout of
:mod:`fedplus.engine`, so a reset-mode engine run configured like one of
these algorithms must produce an identical record stream.
"""

from __future__ import annotations

from dataclasses import replace

from .aggregators import aggregate
from .engine import (
    FederationConfig,
    RoundRecord,
    abs_change_stats,
    as_tasks,
    evaluate_parties,
    init_rng,
    party_rng,
    sample_parties,
    sampling_rng,
)


def _client_update(task, global_model, lr, mu, steps, batch_size, rng):
    w = global_model.copy()
    data = task.data
    for _ in range(steps):
        if batch_size is not None and data is not None:
            batch = data.take(rng.integers(0, len(data), size=batch_size))
        else:
            batch = data
        g = task.grad_fn(w, batch)
        if mu:
            g = g + mu * (w - global_model)
        w = w - lr * g
    return w


def run_server(tasks, *, centrality, mu, rounds, lr, steps, batch_size, sampling, participation=1.0,
               parties_per_round=10, eval_every=1, seed=0, name="baseline"):
    tasks = as_tasks(tasks)
    N = len(tasks)
    sampler = FederationConfig(sampling=sampling, participation=participation, parties_per_round=parties_per_round)
    global_model = tasks[0].initial_params(init_rng(seed))
    records = []
    for k in range(1, rounds + 1):
        clients = sample_parties(sampler, N, sampling_rng(seed, k))
        updates = [
            _client_update(tasks[n], global_model, lr, mu, steps, batch_size, party_rng(seed, n, k)) for n in clients
        ]
        new_global = aggregate(centrality, updates)
        rec = RoundRecord(
            round=k,
            active=clients,
            alpha=float(mu),
            x_hat_before=global_model,
            x_hat_after=new_global,
            change=abs_change_stats(updates, [new_global] * len(updates)),
            center_gap=abs_change_stats(updates, [new_global] * len(updates)),
        )
        global_model = new_global
        if k % eval_every == 0 or k == rounds:
            rec.train_loss, rec.test_acc = evaluate_parties(tasks, [global_model] * N)
        records.append(rec)
    return records


def _common(config):
    return dict(
        rounds=config.rounds,
        lr=config.local.gamma,
        steps=config.local.steps,
        batch_size=config.local.batch_size,
        sampling=config.sampling,
        participation=config.participation,
        parties_per_round=config.parties_per_round,
        eval_every=config.eval_every,
        seed=config.seed,
    )


def run_fedavg(tasks, config):
    return run_server(tasks, centrality=replace(config.centrality, kind="mean"), mu=0.0, name="fedavg", **_common(config))


def run_fedprox(tasks, config, mu):
    return run_server(tasks, centrality=replace(config.centrality, kind="mean"), mu=mu, name="fedprox", **_common(config))


def run_rfa(tasks, config):
    return run_server(tasks, centrality=replace(config.centrality, kind="geometric-median"), mu=0.0, name="rfa",
                      **_common(config))


def run_cmedian(tasks, config):
    return run_server(tasks, centrality=replace(config.centrality, kind="coordinate-median"), mu=0.0,
                      name="cmedian", **_common(config))
