"""Experiment files: parsing, validation and resolution into run configs.

An experiment file is TOML (or the JSON snapshot this module writes) with
four parts::

    [dataset]          # kind = "synthetic" | "quadratic" plus its parameters
    [federation]       # defaults shared by every run
    [output]           # dir = "..."
    [[run]]            # one table per run: preset = "...", or a custom
                       # start_mode/centrality, plus any [federation] key

Unknown keys are rejected. :func:`resolve` fills every default so that the
snapshot written by :func:`snapshot` replays the experiment exactly.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, replace

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

import numpy as np

from .aggregators import CENTRALITY_KINDS, CentralitySpec
from .engine import EVAL_MODELS, PRESETS, SAMPLING_MODES, FederationConfig, QuadraticTask, preset_config
from .errors import ConfigError
from .local import ALPHA_SCHEDULES, START_MODES, AlphaSchedule, LocalSolveSpec
from .params import DISTANCE_KINDS, DistanceSpec
from .synth import PowerLaw, SynthSpec, generate

SYNTH_DEFAULTS = {
    "kind": "synthetic",
    "zeta": 1000.0,
    "beta": 10.0,
    "parties": 30,
    "d_in": 60,
    "d_out": 10,
    "count_exponent": 1.5,
    "min_count": 64,
    "max_count": 1024,
    "train_fraction": 0.8,
    "seed": 0,
}
QUADRATIC_DEFAULTS = {"kind": "quadratic", "centers": None}

FEDERATION_DEFAULTS = {
    "rounds": 200,
    "local_steps": 20,
    "learning_rate": 0.01,
    "batch_size": 32,
    "sampling": "fixed-count",
    "participation": 1.0,
    "parties_per_round": 10,
    "alpha": 0.001,
    "prox_mu": 1.0,
    "alpha_schedule": "constant",
    "alpha_decay": 0.99,
    "aggregate_over": "active",
    "eval_every": 1,
    "eval_model": "auto",
    "seed": 0,
    "centrality_weights": "uniform",
    "weiszfeld_iters": 1000,
    "weiszfeld_tol": 1e-10,
    "weiszfeld_smoothing": 1e-8,
    "distance": "squared-l2",
    "q_diag": None,
}
CUSTOM_KEYS = {"start_mode": None, "centrality": None}
RUN_KEYS = {"preset", "name"} | set(FEDERATION_DEFAULTS) | set(CUSTOM_KEYS)
START_ALIASES = {"reset-to-central": "reset"}


@dataclass
class Run:
    name: str
    preset: str | None
    config: FederationConfig
    settings: dict


@dataclass
class Experiment:
    dataset: dict
    federation: dict
    runs: list
    output_dir: str | None

    def tasks(self):
        return make_tasks(self.dataset)


def load(path):
    """Read an experiment file (``.json`` snapshots or TOML)."""
    text = open(path, "rb").read()
    try:
        if str(path).endswith(".json"):
            return json.loads(text)
        return tomllib.loads(text.decode())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc


def _reject_unknown(table, allowed, where):
    unknown = sorted(set(table) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(unknown)}; allowed: {', '.join(sorted(allowed))}")


def _choice(value, options, key):
    if value not in options:
        raise ConfigError(f"{key} = {value!r}; expected one of {', '.join(options)}")
    return value


def _number(value, key, kind=float):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{key} must be a number, got {value!r}")
    if kind is int:
        if int(value) != value:
            raise ConfigError(f"{key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def resolve_dataset(table):
    table = dict(table or {})
    kind = table.get("kind", "synthetic")
    _choice(kind, ("synthetic", "quadratic"), "dataset.kind")
    defaults = SYNTH_DEFAULTS if kind == "synthetic" else QUADRATIC_DEFAULTS
    _reject_unknown(table, defaults, "[dataset]")
    out = {**defaults, **table}
    if kind == "quadratic":
        centers = out["centers"]
        if not centers:
            raise ConfigError("dataset.centers is required for a quadratic dataset")
        arr = [list(map(float, np.atleast_1d(c))) for c in centers]
        if len({len(c) for c in arr}) != 1:
            raise ConfigError("dataset.centers must all have the same length")
        out["centers"] = arr
        return out
    for key in ("parties", "d_in", "d_out", "min_count", "max_count", "seed"):
        out[key] = _number(out[key], f"dataset.{key}", int)
    for key in ("zeta", "beta", "count_exponent", "train_fraction"):
        out[key] = _number(out[key], f"dataset.{key}")
    synth_spec(out).validate()
    return out


def synth_spec(dataset):
    return SynthSpec(
        zeta=dataset["zeta"],
        beta=dataset["beta"],
        parties=dataset["parties"],
        d_in=dataset["d_in"],
        d_out=dataset["d_out"],
        counts=PowerLaw(dataset["count_exponent"], dataset["min_count"], dataset["max_count"]),
        train_fraction=dataset["train_fraction"],
        seed=dataset["seed"],
    )


def make_tasks(dataset):
    if dataset["kind"] == "quadratic":
        return [QuadraticTask(c) for c in dataset["centers"]]
    return generate(synth_spec(dataset))


def dataset_parties(dataset):
    return len(dataset["centers"]) if dataset["kind"] == "quadratic" else dataset["parties"]


def _settings(table, where):
    s = dict(table)
    for key in ("rounds", "local_steps", "parties_per_round", "eval_every", "seed", "weiszfeld_iters"):
        s[key] = _number(s[key], f"{where}.{key}", int)
    for key in ("learning_rate", "participation", "alpha", "prox_mu", "alpha_decay", "weiszfeld_tol", "weiszfeld_smoothing"):
        s[key] = _number(s[key], f"{where}.{key}")
    if s["batch_size"] != "full":
        s["batch_size"] = _number(s["batch_size"], f"{where}.batch_size", int)
    _choice(s["sampling"], SAMPLING_MODES, f"{where}.sampling")
    _choice(s["alpha_schedule"], ALPHA_SCHEDULES, f"{where}.alpha_schedule")
    _choice(s["aggregate_over"], ("active", "all"), f"{where}.aggregate_over")
    _choice(s["eval_model"], EVAL_MODELS, f"{where}.eval_model")
    _choice(s["centrality_weights"], ("uniform", "samples"), f"{where}.centrality_weights")
    _choice(s["distance"], DISTANCE_KINDS, f"{where}.distance")
    if s["q_diag"] is not None:
        s["q_diag"] = [_number(q, f"{where}.q_diag") for q in s["q_diag"]]
    return s


def _federation_config(s, name, preset, dataset, tasks_sizes):
    weights = None
    if s["centrality_weights"] == "samples":
        if tasks_sizes is None:
            raise ConfigError("centrality_weights = 'samples' needs a synthetic dataset")
        weights = tuple(float(n) for n in tasks_sizes)
    base = FederationConfig(
        name=name,
        rounds=s["rounds"],
        local=LocalSolveSpec(
            steps=s["local_steps"],
            gamma=s["learning_rate"],
            batch_size=None if s["batch_size"] == "full" else s["batch_size"],
            distance=DistanceSpec(s["distance"], tuple(s["q_diag"]) if s["q_diag"] else None),
        ),
        centrality=CentralitySpec(
            kind="mean",
            weights=weights,
            weiszfeld_iters=s["weiszfeld_iters"],
            weiszfeld_tol=s["weiszfeld_tol"],
            weiszfeld_smoothing=s["weiszfeld_smoothing"],
        ),
        sampling=s["sampling"],
        participation=s["participation"],
        parties_per_round=s["parties_per_round"],
        aggregate_over=s["aggregate_over"],
        eval_every=s["eval_every"],
        eval_model=s["eval_model"],
        seed=s["seed"],
    )
    if preset is not None:
        cfg = preset_config(
            preset, base, alpha=s["alpha"], prox_mu=s["prox_mu"], alpha_schedule=s["alpha_schedule"], decay=s["alpha_decay"]
        )
        cfg = replace(cfg, name=name)
    else:
        cfg = replace(
            base,
            start_mode=s["start_mode"],
            centrality=replace(base.centrality, kind=s["centrality"]),
            alpha=AlphaSchedule(s["alpha_schedule"], s["alpha"], s["alpha_decay"]),
        )
    try:
        return cfg.validate(dataset_parties(dataset))
    except ConfigError as exc:
        raise ConfigError(f"run {name!r}: {exc}") from exc


def resolve(raw, overrides=None):
    """Validate a raw experiment mapping and build every run's config.

    ``overrides`` may hold ``seed`` (applied to the dataset and every run),
    ``rounds`` and ``out``. Nothing is executed here.
    """
    raw = copy.deepcopy(raw)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    _reject_unknown(raw, {"dataset", "federation", "output", "run"}, "the top level")
    dataset = resolve_dataset(raw.get("dataset"))
    fed = dict(raw.get("federation") or {})
    _reject_unknown(fed, FEDERATION_DEFAULTS, "[federation]")
    fed = {**FEDERATION_DEFAULTS, **fed}
    output = dict(raw.get("output") or {})
    _reject_unknown(output, {"dir"}, "[output]")

    if "seed" in overrides:
        fed["seed"] = overrides["seed"]
        if dataset["kind"] == "synthetic":
            dataset["seed"] = overrides["seed"]
    if "rounds" in overrides:
        fed["rounds"] = overrides["rounds"]
    fed = _settings(fed, "federation")

    run_tables = raw.get("run") or []
    if not isinstance(run_tables, list) or not run_tables:
        raise ConfigError("at least one [[run]] table is required")
    sizes = None
    if dataset["kind"] == "synthetic" and any(
        {**fed, **r}.get("centrality_weights") == "samples" for r in run_tables if isinstance(r, dict)
    ):
        sizes = [len(t.train) for t in make_tasks(dataset)]

    runs, names = [], set()
    for i, table in enumerate(run_tables):
        where = f"run[{i}]"
        if not isinstance(table, dict):
            raise ConfigError(f"{where} must be a table")
        _reject_unknown(table, RUN_KEYS, where)
        table = dict(table)
        preset = table.pop("preset", None)
        if preset is not None and preset not in PRESETS:
            raise ConfigError(f"{where}: unknown preset {preset!r}; valid presets: {', '.join(PRESETS)}")
        custom = {k: table.pop(k) for k in list(CUSTOM_KEYS) if k in table}
        if preset is not None and custom:
            raise ConfigError(f"{where}: preset runs cannot set {', '.join(sorted(custom))}")
        if "seed" in overrides:
            table.pop("seed", None)
        if "rounds" in overrides:
            table.pop("rounds", None)
        name = table.pop("name", preset)
        if name is None:
            raise ConfigError(f"{where}: custom runs need a name")
        if name in names:
            raise ConfigError(f"{where}: duplicate run name {name!r}")
        names.add(name)
        settings = _settings({**fed, **table}, where)
        if preset is None:
            for key in CUSTOM_KEYS:
                if key not in custom:
                    raise ConfigError(f"{where}: custom runs must set {key}")
            custom["start_mode"] = START_ALIASES.get(custom["start_mode"], custom["start_mode"])
            _choice(custom["start_mode"], START_MODES, f"{where}.start_mode")
            _choice(custom["centrality"], CENTRALITY_KINDS, f"{where}.centrality")
            settings.update(custom)
        cfg = _federation_config(settings, name, preset, dataset, sizes)
        runs.append(Run(name=name, preset=preset, config=cfg, settings=settings))
    out_dir = overrides.get("out", output.get("dir"))
    return Experiment(dataset=dataset, federation=fed, runs=runs, output_dir=out_dir)


def snapshot(experiment):
    """Fully resolved experiment as a JSON-ready mapping (replayable)."""
    runs = []
    for run in experiment.runs:
        entry = {"name": run.name}
        if run.preset is not None:
            entry["preset"] = run.preset
        entry.update(
            {k: v for k, v in run.settings.items() if k in FEDERATION_DEFAULTS or (run.preset is None and k in CUSTOM_KEYS)}
        )
        runs.append(entry)
    out = {"dataset": experiment.dataset, "federation": experiment.federation, "run": runs}
    if experiment.output_dir is not None:
        out["output"] = {"dir": str(experiment.output_dir)}
    return out
