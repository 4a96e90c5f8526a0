"""``fedplus`` command line: run experiment files, list presets, export data.

Exit status: 0 on success, 2 for configuration errors, 3 when a run fails
numerically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import reporting
from .engine import describe_presets, run_federation
from .errors import ConfigError, NumericalError
from .experiment import load, resolve, snapshot, synth_spec
from .synth import export_tasks, generate

DEFAULT_OUT = "fedplus-out"
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def output_dir(cli_out, experiment_out=None):
    return Path(cli_out or experiment_out or os.environ.get("FEDPLUS_OUT") or DEFAULT_OUT)


def execute_run(run, dataset, tasks):
    """Run one resolved config; return its summary (wall clock included)."""
    start = time.perf_counter()
    records = run_federation(run.config, tasks)
    config = {"dataset": dataset, "federation": reporting._plain(run.config)}
    return reporting.summarize(records, config=config, preset=run.name, wall_clock=time.perf_counter() - start)


def _write_run(summary, out):
    run_dir = out / summary.preset
    run_dir.mkdir(parents=True, exist_ok=True)
    reporting.write_csv(summary, run_dir / "rounds.csv")
    reporting.write_json(summary, run_dir / "summary.json")
    (run_dir / "timing.json").write_text(json.dumps({"wall_clock_seconds": summary.wall_clock}) + "\n")


def run_experiment(experiment, out, jobs=1, log=print):
    """Execute every run of a resolved experiment and write its artifacts."""
    out.mkdir(parents=True, exist_ok=True)
    (out / "resolved_config.json").write_text(json.dumps(snapshot(experiment), indent=2, sort_keys=True) + "\n")
    tasks = experiment.tasks()
    if jobs > 1 and len(experiment.runs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = [pool.submit(execute_run, run, experiment.dataset, tasks) for run in experiment.runs]
            summaries = []
            for run, fut in zip(experiment.runs, futures):
                try:
                    summaries.append(fut.result())
                except NumericalError as exc:
                    exc.run = run.name
                    raise
    else:
        summaries = []
        for run in experiment.runs:
            try:
                summaries.append(execute_run(run, experiment.dataset, tasks))
            except NumericalError as exc:
                exc.run = run.name
                raise
    for s in summaries:
        _write_run(s, out)
        acc = "n/a" if s.final_avg_test_acc is None else f"{s.final_avg_test_acc:.4f}"
        log(f"{s.preset:<12} final avg test acc {acc}  ({s.wall_clock:.1f}s)")
    reporting.write_csv(summaries, out / "results.csv")
    return summaries


def cmd_run(args):
    experiment = resolve(load(args.config), {"seed": args.seed, "rounds": args.rounds})
    out = output_dir(args.out, experiment.output_dir)
    run_experiment(experiment, out, jobs=args.jobs)
    print(f"results written to {out}")
    return 0


def cmd_list_presets(args):
    print(describe_presets())
    return 0


def cmd_export_data(args):
    experiment = resolve(load(args.config), {"seed": args.seed})
    if experiment.dataset["kind"] != "synthetic":
        raise ConfigError("export-data needs a synthetic dataset")
    path = Path(args.out) if args.out else output_dir(None, experiment.output_dir) / "data.csv"
    path.parent.mkdir(parents=True, exist_ok=True)
    export_tasks(generate(synth_spec(experiment.dataset)), path)
    print(f"wrote {path}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="fedplus", description="Simulate the Fed+ family of federated algorithms.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="execute every run of an experiment file")
    p.add_argument("config", help="experiment file (.toml, or a resolved_config.json snapshot)")
    p.add_argument("--seed", type=int, help="override dataset and federation seeds")
    p.add_argument("--rounds", type=int, help="override the number of rounds")
    p.add_argument("--out", help="output directory (fallback: [output].dir, then $FEDPLUS_OUT)")
    p.add_argument("--jobs", type=int, default=1, help="runs executed concurrently (default 1)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("list-presets", help="show the named algorithm presets")
    p.set_defaults(func=cmd_list_presets)

    p = sub.add_parser("export-data", help="write the experiment's synthetic dataset as CSV")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV path (default <output dir>/data.csv)")
    p.set_defaults(func=cmd_export_data)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"fedplus: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        run = getattr(exc, "run", None)
        prefix = f"run {run!r}: " if run else ""
        print(f"fedplus: numerical failure: {prefix}{exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
